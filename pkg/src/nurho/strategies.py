"""Innocent strategies as deterministic oracles on P-views.

A strategy answers odd-length P-views (as plays) with the next move, its
justifier inside the view, and the list of freshly introduced names.
Responses are memoized on orbit-canonical views, which both enforces
determinacy up to renaming and keeps fresh-name choices reproducible.

Three kinds of strategies cover everything downstream:

* machines: a small prelude automaton plus *copycat zones*, the uniform
  mechanism behind identities, projections, the lifting monad pieces and
  the reference primitives;
* view transformers: combinators (pairing, tensor, lifting, currying)
  that re-address the view, delegate to inner strategies and re-address
  the answer;
* chains: composites evaluated by replaying the view through an n-ary
  parallel interaction of the component strategies.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Iterator, Optional

from .arenas import (
    Arena,
    Budget,
    DepthExceeded,
    Imp,
    Lift,
    MERGE,
    Move,
    Names,
    NatArena,
    One,
    PAIR,
    STAR,
    STAR1,
    STAR2,
    STORE0,
    Store,
    Tensor,
    enum_schemas,
    mk_tensor,
)
from .nominal import (
    Atom,
    Permutation,
    apply_perm,
    atoms_of,
    canonical_perm,
    fresh_atom,
    support,
)
from .plays import Board, Entry, Play, SRC, TGT, pview, pview_with_origins, view_indices


@dataclass(frozen=True)
class Response:
    comp: str
    move: Move
    justifier: int
    delta: tuple[Atom, ...] = ()

    def entry(self) -> Entry:
        return Entry(self.comp, self.move, self.justifier, self.delta)

    def _map_atoms_(self, pi):
        return Response(
            self.comp,
            self.move._map_atoms_(pi),
            self.justifier,
            tuple(pi(a) for a in self.delta),
        )

    def _iter_atoms_(self):
        yield from atoms_of(self.move)
        yield from self.delta


class CompositionBudget(Exception):
    """The interaction did not settle within the step budget (distinct from
    a definitive non-response)."""


class OracleError(RuntimeError):
    pass


def extend_view(view: Play, r: Response) -> Play:
    return view.append(r.entry())


def _freshen(r: Response, taboo: set[Atom]) -> Response:
    """Rename the introduced atoms of r away from `taboo` (deterministic)."""
    if not r.delta:
        return r
    mapping: dict[Atom, Atom] = {}
    pool = set(taboo) | set(r.delta) | set(atoms_of(r.move))
    for a in r.delta:
        if a in taboo:
            b = fresh_atom(a.family, pool)
            mapping[a] = b
            pool.add(b)
    if not mapping:
        return r
    from .nominal import _complete_to_permutation

    pi = _complete_to_permutation(mapping)
    return r._map_atoms_(pi)


class Strategy:
    """Base class: deterministic innocent oracle over a fixed board."""

    def __init__(self, board: Board, name: str = "?"):
        self.board = board
        self.name = name
        self._memo: dict[tuple, Optional[Response]] = {}

    def __repr__(self):
        return f"<{self.name} : {self.board}>"

    # -- the oracle ---------------------------------------------------------
    def respond(self, view: Play) -> Optional[Response]:
        if len(view) % 2 != 1:
            raise OracleError(f"{self.name}: view length {len(view)} not odd")
        canon, pi = view.canonical()
        key = canon.entries
        if key in self._memo:
            r = self._memo[key]
        else:
            r = self.respond_raw(canon)
            if r is not None and r.delta:
                r = _freshen(r, set(support(canon)))
            self._memo[key] = r
        if r is None:
            return None
        out = r._map_atoms_(pi.inverse())
        return _freshen(out, set(support(view)))

    def respond_raw(self, view: Play) -> Optional[Response]:
        raise NotImplementedError

    # -- fresh helper --------------------------------------------------------
    def fresh(self, family, view: Play, extra: Iterable[Atom] = ()) -> Atom:
        return fresh_atom(family, set(support(view)) | set(extra))


# ---------------------------------------------------------------------------
# Machines: prelude automaton + copycat zones
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Zone:
    """Moves in (own_comp, own_prefix·rest) mirror to
    (tgt_comp, tgt_prefix·rest) justified by tgt_idx."""

    own_comp: str
    own_prefix: tuple
    tgt_idx: int
    tgt_comp: str
    tgt_prefix: tuple

    def flip(self, o_idx: int) -> "Zone":
        return Zone(self.tgt_comp, self.tgt_prefix, o_idx, self.own_comp, self.own_prefix)


NO_RESPONSE = "no-response"


class MachineStrategy(Strategy):
    """Prelude hook + generic zone mirroring.

    `prelude(view, i, links)` inspects the O-move at index i and returns a
    (Response, zones) pair, NO_RESPONSE, or None to fall through to the
    zone machinery.  Zones returned are anchored at the response's index.
    """

    def prelude(self, view, i, links):
        raise NotImplementedError

    def respond_raw(self, view: Play) -> Optional[Response]:
        links: dict[int, list[Zone]] = {}
        for k in range(1, len(view) + 1, 2):
            out = self._decide(Play(view.board, view.entries[:k]), links)
            if out is NO_RESPONSE or out is None:
                if k < len(view):
                    raise OracleError(f"{self.name}: view extends a non-response")
                return None
            r, zones = out
            links[k] = list(zones)
            if k < len(view):
                actual = view.entries[k]
                if (actual.comp, actual.move, actual.justifier) != (
                    r.comp,
                    r.move,
                    r.justifier,
                ):
                    raise OracleError(
                        f"{self.name}: view disagrees with oracle at {k}: "
                        f"{actual} vs {r}"
                    )
        return r

    def _decide(self, prefix: Play, links):
        i = len(prefix) - 1
        out = self.prelude(prefix, i, links)
        if out is not None:
            return out
        x = prefix.entries[i]
        j = x.justifier
        if j is None:
            return NO_RESPONSE
        best: Optional[Zone] = None
        for z in links.get(j, ()):
            if x.comp == z.own_comp and x.move.addr[: len(z.own_prefix)] == z.own_prefix:
                if best is None or len(z.own_prefix) > len(best.own_prefix):
                    best = z
        if best is None:
            return NO_RESPONSE
        moved = Move(
            best.tgt_prefix + x.move.addr[len(best.own_prefix):], x.move.pay
        )
        if not self.board.arena(best.tgt_comp).has_move(moved):
            return NO_RESPONSE
        r = Response(best.tgt_comp, moved, best.tgt_idx)
        return r, [best.flip(i)]


class Copycat(MachineStrategy):
    """Identity / embedding / projection: mirror everything verbatim."""

    def __init__(self, board: Board, name: str = "id"):
        super().__init__(board, name)

    def prelude(self, view, i, links):
        if i == 0:
            p = view.entries[0].move.pay
            if not self.board.tgt.initial_schema().contains(p):
                return NO_RESPONSE
            r = Response(TGT, Move((), p), 0)
            return r, [Zone(TGT, (), 0, SRC, ())]
        return None


def identity(a: Arena) -> Strategy:
    return Copycat(Board(a, a))


def inclusion(a: Arena, b: Arena) -> Strategy:
    return Copycat(Board(a, b), name="incl")


def projection_embed(b: Arena, a: Arena) -> Strategy:
    return Copycat(Board(b, a), name="proj")


class PathProjection(MachineStrategy):
    """Tensor projection onto the component at `path` ('l'/'r' steps)."""

    def __init__(self, src: Arena, path: tuple, name: str = "pi"):
        tgt = src
        for step in path:
            assert isinstance(tgt, Tensor), f"no component {path} in {src}"
            tgt = tgt.left if step == "l" else tgt.right
        super().__init__(Board(src, tgt), f"{name}{''.join(path)}")
        self.path = tuple(path)

    def prelude(self, view, i, links):
        if i == 0:
            p = view.entries[0].move.pay
            r = Response(TGT, Move((), pay_at(p, self.path)), 0)
            return r, [Zone(TGT, (), 0, SRC, self.path)]
        return None


def pay_at(pay, path: tuple):
    for step in path:
        assert isinstance(pay, tuple) and pay[0] == PAIR, f"no {path} in {pay}"
        pay = pay[1] if step == "l" else pay[2]
    return pay


class NameListProj(MachineStrategy):
    """pi^{abar}_{abar'}: project an ambient name tuple onto a subtuple."""

    def __init__(self, positions: tuple[int, ...], src: Names):
        tgt = (
            One()
            if not positions
            else Names(tuple(src.signature[p] for p in positions))
        )
        super().__init__(Board(src, tgt), "pi-names")
        self.positions = positions

    def prelude(self, view, i, links):
        if i == 0:
            xs = view.entries[0].move.pay
            pay = STAR if not self.positions else tuple(xs[p] for p in self.positions)
            return Response(TGT, Move((), pay), 0), []
        return None


class Bang(MachineStrategy):
    """The unique arrow to the unit arena."""

    def __init__(self, src: Arena):
        super().__init__(Board(src, One()), "!")

    def prelude(self, view, i, links):
        if i == 0:
            return Response(TGT, Move((), STAR), 0), []
        return NO_RESPONSE


class Numeral(MachineStrategy):
    def __init__(self, n: int):
        super().__init__(Board(One(), NatArena()), f"num{n}")
        self.n = n

    def prelude(self, view, i, links):
        if i == 0:
            return Response(TGT, Move((), self.n), 0), []
        return NO_RESPONSE


class NatFn(MachineStrategy):
    def __init__(self, fn: Callable[[int], int], name: str = "natfn"):
        super().__init__(Board(NatArena(), NatArena()), name)
        self.fn = fn

    def prelude(self, view, i, links):
        if i == 0:
            return Response(TGT, Move((), self.fn(view.entries[0].move.pay)), 0), []
        return NO_RESPONSE


class EqStrat(MachineStrategy):
    """Name equality: initial move holds two name payloads, answer 0 or 1."""

    def __init__(self, src: Tensor):
        super().__init__(Board(src, NatArena()), "eq")

    def prelude(self, view, i, links):
        if i == 0:
            p = view.entries[0].move.pay
            left = [a for a in atoms_of(p[1])]
            right = [a for a in atoms_of(p[2])]
            assert len(left) == 1 and len(right) == 1, "eq expects single names"
            return Response(TGT, Move((), 0 if left == right else 1), 0), []
        return NO_RESPONSE


class Diagonal(MachineStrategy):
    def __init__(self, a: Arena):
        super().__init__(Board(a, Tensor(a, a)), "delta")

    def prelude(self, view, i, links):
        if i == 0:
            p = view.entries[0].move.pay
            r = Response(TGT, Move((), (PAIR, p, p)), 0)
            return r, [Zone(TGT, ("l",), 0, SRC, ()), Zone(TGT, ("r",), 0, SRC, ())]
        return None


class IsoStrategy(MachineStrategy):
    """Copycat across a structural tensor isomorphism."""

    def __init__(self, src: Arena, tgt: Arena, pay_fwd, zones: list[tuple[tuple, tuple]], name="iso"):
        super().__init__(Board(src, tgt), name)
        self.pay_fwd = pay_fwd
        self.zone_pairs = zones

    def prelude(self, view, i, links):
        if i == 0:
            p = view.entries[0].move.pay
            r = Response(TGT, Move((), self.pay_fwd(p)), 0)
            return r, [
                Zone(TGT, tgtp, 0, SRC, srcp) for srcp, tgtp in self.zone_pairs
            ]
        return None


def symm(a: Arena, b: Arena) -> Strategy:
    return IsoStrategy(
        Tensor(a, b),
        Tensor(b, a),
        lambda p: (PAIR, p[2], p[1]),
        [(("l",), ("r",)), (("r",), ("l",))],
        name="symm",
    )


def assoc_rt(a: Arena, b: Arena, c: Arena) -> Strategy:
    """(a⊗b)⊗c -> a⊗(b⊗c)."""
    return IsoStrategy(
        Tensor(Tensor(a, b), c),
        Tensor(a, Tensor(b, c)),
        lambda p: (PAIR, p[1][1], (PAIR, p[1][2], p[2])),
        [(("l", "l"), ("l",)), (("l", "r"), ("r", "l")), (("r",), ("r", "r"))],
        name="assoc",
    )


def assoc_lt(a: Arena, b: Arena, c: Arena) -> Strategy:
    """a⊗(b⊗c) -> (a⊗b)⊗c."""
    return IsoStrategy(
        Tensor(a, Tensor(b, c)),
        Tensor(Tensor(a, b), c),
        lambda p: (PAIR, (PAIR, p[1], p[2][1]), p[2][2]),
        [(("l",), ("l", "l")), (("r", "l"), ("l", "r")), (("r", "r"), ("r",))],
        name="assoc'",
    )


def unit_intro_left(a: Arena) -> Strategy:
    """a -> 1⊗a."""
    return IsoStrategy(
        a, Tensor(One(), a), lambda p: (PAIR, STAR, p), [((), ("r",))], name="unitl"
    )


def unit_elim_left(a: Arena) -> Strategy:
    return IsoStrategy(
        Tensor(One(), a), a, lambda p: p[2], [(("r",), ())], name="unitl'"
    )


def unit_elim_right(a: Arena) -> Strategy:
    return IsoStrategy(
        Tensor(a, One()), a, lambda p: p[1], [(("l",), ())], name="unitr'"
    )


# -- lifting monad pieces ----------------------------------------------------

class Up(MachineStrategy):
    def __init__(self, a: Arena):
        super().__init__(Board(a, Lift(a)), "up")

    def prelude(self, view, i, links):
        if i == 0:
            return Response(TGT, Move((), STAR1), 0), []
        if i == 2:
            p = view.entries[0].move.pay
            r = Response(TGT, Move(("a",), p), 2)
            return r, [Zone(TGT, ("a",), 0, SRC, ())]
        return None


class Dn(MachineStrategy):
    def __init__(self, a: Arena):
        super().__init__(Board(Lift(Lift(a)), Lift(a)), "dn")

    def prelude(self, view, i, links):
        if i == 0:
            return Response(TGT, Move((), STAR1), 0), []
        if i == 2:
            return Response(SRC, Move(("u",), STAR2), 0), []
        if i == 4:
            r = Response(SRC, Move(("a", "u"), STAR2), 4)
            return r, [Zone(SRC, ("a", "a"), 2, TGT, ("a",))]
        return None


class St(MachineStrategy):
    """Strength of lifting: a ⊗ lift(b) -> lift(a ⊗ b)."""

    def __init__(self, a: Arena, b: Arena):
        super().__init__(Board(Tensor(a, Lift(b)), Lift(Tensor(a, b))), "st")

    def prelude(self, view, i, links):
        if i == 0:
            return Response(TGT, Move((), STAR1), 0), []
        if i == 2:
            return Response(SRC, Move(("r", "u"), STAR2), 0), []
        if i == 4:
            pa = view.entries[0].move.pay[1]
            pb = view.entries[4].move.pay
            r = Response(TGT, Move(("a",), (PAIR, pa, pb)), 2)
            return r, [
                Zone(TGT, ("a", "l"), 0, SRC, ("l",)),
                Zone(TGT, ("a", "r"), 4, SRC, ("r", "a")),
            ]
        return None


class Pu(MachineStrategy):
    """lift(a) -> a for pointed a."""

    def __init__(self, a: Arena):
        assert a.is_pointed(), f"pu needs a pointed arena, got {a}"
        super().__init__(Board(Lift(a), a), "pu")

    def prelude(self, view, i, links):
        if i == 0:
            return Response(TGT, Move((), self.board.tgt.point()), 0), []
        if i == 2 and view.entries[2].comp == TGT and view.entries[2].justifier == 1:
            return Response(SRC, Move(("u",), STAR2), 0), []
        if i == 4 and view.entries[4].comp == SRC:
            j_move = view.entries[2].move
            r = Response(SRC, Move(("a",) + j_move.addr, j_move.pay), 4)
            return r, [Zone(SRC, ("a",), 2, TGT, ())]
        return None


# -- fresh names --------------------------------------------------------------

class NewName(MachineStrategy):
    """new: (names ⊗ a) -> lift(names+1 ⊗ a), introducing the new atom."""

    def __init__(self, sig: tuple, family, a: Arena):
        src = mk_tensor(Names(sig) if sig else One(), a)
        tgt = Lift(mk_tensor(Names(tuple(sig) + (family,)), a))
        super().__init__(Board(src, tgt), "new")
        self.sig = tuple(sig)
        self.family = family

    def prelude(self, view, i, links):
        if i == 0:
            return Response(TGT, Move((), STAR1), 0), []
        if i == 2:
            p0 = view.entries[0].move.pay
            if self.sig:
                names, pa = p0[1], p0[2]
            else:
                names, pa = (), p0[2]
            c = self.fresh(self.family, view)
            r = Response(
                TGT, Move(("a",), (PAIR, tuple(names) + (c,), pa)), 2, (c,)
            )
            return r, [Zone(TGT, ("a", "r"), 0, SRC, ("r",))]
        return None


class Binom(MachineStrategy):
    """Generalized fresh-name constructor names(sig) -> lift(names(sig'))
    where sig extends to sig' via `positions` (old index or None=fresh)."""

    def __init__(self, src_sig: tuple, positions: tuple[Optional[int], ...], families: tuple):
        src = Names(src_sig) if src_sig else One()
        tgt_sig = tuple(
            src_sig[p] if p is not None else families[i]
            for i, p in enumerate(positions)
        )
        super().__init__(Board(src, Lift(Names(tgt_sig))), "binom")
        self.positions = positions
        self.tgt_sig = tgt_sig

    def prelude(self, view, i, links):
        if i == 0:
            return Response(TGT, Move((), STAR1), 0), []
        if i == 2:
            xs = view.entries[0].move.pay
            xs = xs if isinstance(xs, tuple) else ()
            out, delta = [], []
            for pos, fam in zip(self.positions, self.tgt_sig):
                if pos is not None:
                    out.append(xs[pos])
                else:
                    c = fresh_atom(fam, set(support(view)) | set(out))
                    out.append(c)
                    delta.append(c)
            return Response(TGT, Move(("a",), tuple(out)), 2, tuple(delta)), []
        return None


# -- reference primitives ------------------------------------------------------

class DrfStrategy(MachineStrategy):
    """Dereference: ask the name at the store, return and thread the value."""

    def __init__(self, c_type, k: int, value_arena: Optional[Arena] = None):
        from .arenas import t_arena, translate_type

        self.c_type = c_type
        den = value_arena if value_arena is not None else translate_type(c_type, k)
        super().__init__(Board(Names((c_type,)), t_arena(den, k)), f"drf[{c_type}]")

    def prelude(self, view, i, links):
        if i == 0:
            return Response(TGT, Move((), STAR), 0), []
        if i == 2:
            a = view.entries[0].move.pay[0]
            return Response(TGT, Move(("a", "q"), a), 2), []
        if i == 4:
            pv = view.entries[4].move.pay
            r = Response(TGT, Move(("b",), (PAIR, pv, STORE0)), 2)
            return r, [
                Zone(TGT, ("b", "l"), 4, TGT, ("a", "v", self.c_type)),
                Zone(TGT, ("b", "r"), 2, TGT, ("a",)),
            ]
        return None


class UpdStrategy(MachineStrategy):
    """Update: answer the store immediately; serve the written name from the
    held value, pass every other name to the previous store."""

    def __init__(self, c_type, k: int, value_arena: Optional[Arena] = None):
        from .arenas import t_arena, translate_type

        self.c_type = c_type
        den = value_arena if value_arena is not None else translate_type(c_type, k)
        super().__init__(
            Board(Tensor(Names((c_type,)), den), t_arena(One(), k)),
            f"upd[{c_type}]",
        )

    def prelude(self, view, i, links):
        if i == 0:
            return Response(TGT, Move((), STAR), 0), []
        if i == 2:
            r = Response(TGT, Move(("b",), (PAIR, STAR, STORE0)), 2)
            return r, [Zone(TGT, ("b", "r"), 2, TGT, ("a",))]
        x = view.entries[i]
        held = view.entries[0].move.pay[1][0]
        if (
            x.comp == TGT
            and x.move.addr == ("b", "r", "q")
            and x.move.pay == held
            and view.entries[x.justifier].move.addr == ("b",)
        ):
            value_pay = view.entries[0].move.pay[2]
            r = Response(
                TGT, Move(("b", "r", "v", self.c_type), value_pay), i
            )
            return r, [Zone(TGT, ("b", "r", "v", self.c_type), 0, SRC, ("r",))]
        return None


class CndStrategy(MachineStrategy):
    """Zero-test dispatch: n ⊗ (T a)² -> T a, total copycat of the branch."""

    def __init__(self, value: Arena, k: int):
        from .arenas import t_arena

        ta = t_arena(value, k)
        super().__init__(Board(Tensor(NatArena(), Tensor(ta, ta)), ta), "cnd")

    def prelude(self, view, i, links):
        if i == 0:
            n = view.entries[0].move.pay[1]
            branch = ("r", "l") if n == 0 else ("r", "r")
            r = Response(TGT, Move((), STAR), 0)
            return r, [Zone(TGT, (), 0, SRC, branch)]
        return None


# ---------------------------------------------------------------------------
# View transformers
# ---------------------------------------------------------------------------

class TransformStrategy(Strategy):
    """Delegate to an inner strategy through a view translation."""

    def inner_for(self, view: Play):
        """Return (inner strategy, translated view, back map) where back
        maps the inner Response to an outer one."""
        raise NotImplementedError

    def initial_response(self, view: Play) -> Optional[Response]:
        raise NotImplementedError

    def respond_raw(self, view: Play) -> Optional[Response]:
        if len(view) == 1:
            return self.initial_response(view)
        inner, iview, back = self.inner_for(view)
        r = inner.respond(iview)
        if r is None:
            return None
        return back(r)


def translate_entries(view, start, comp_map, just_map):
    """Helper: map entries from `start` on, preserving positions."""
    out = []
    for idx in range(start, len(view.entries)):
        e = view.entries[idx]
        comp, move = comp_map(e.comp, e.move)
        out.append(Entry(comp, move, just_map(e.justifier, e), e.delta))
    return out


class Pairing(TransformStrategy):
    """<f, g> : c -> a ⊗ b."""

    def __init__(self, f: Strategy, g: Strategy):
        assert f.board.src == g.board.src, "pairing needs a common source"
        board = Board(f.board.src, Tensor(f.board.tgt, g.board.tgt))
        super().__init__(board, f"<{f.name},{g.name}>")
        self.f, self.g = f, g

    def initial_response(self, view):
        inits = view.entries[:1]
        rf = self.f.respond(Play(self.f.board, inits))
        if rf is None:
            return None
        rg = self.g.respond(Play(self.g.board, inits))
        if rg is None:
            return None
        rg = _freshen(rg, set(support(view)) | set(atoms_of(rf)) | set(rf.delta))
        pay = (PAIR, rf.move.pay, rg.move.pay)
        return Response(TGT, Move((), pay), 0, tuple(rf.delta) + tuple(rg.delta))

    def inner_for(self, view):
        side = view.entries[2].move.addr[0]  # thread fixed by the 3rd move
        inner = self.f if side == "l" else self.g
        other = self.g if side == "l" else self.f
        r_own = inner.respond(Play(inner.board, view.entries[:1]))

        def comp_map(comp, move):
            if comp == SRC:
                return comp, move
            assert move.addr[:1] == (side,), f"thread broken at {move}"
            return TGT, Move(move.addr[1:], move.pay)

        def just_map(j, e):
            return j

        entries = [view.entries[0]]
        entries.append(Entry(TGT, r_own.move, 0, r_own.delta))
        entries += translate_entries(view, 2, comp_map, just_map)
        iview = Play(inner.board, tuple(entries))

        def back(r: Response) -> Response:
            if r.comp == SRC:
                return r
            return Response(TGT, Move((side,) + r.move.addr, r.move.pay), r.justifier, r.delta)

        return inner, iview, back


class TensorOf(TransformStrategy):
    """f ⊗ g : a ⊗ b -> a' ⊗ b'."""

    def __init__(self, f: Strategy, g: Strategy):
        board = Board(
            Tensor(f.board.src, g.board.src), Tensor(f.board.tgt, g.board.tgt)
        )
        super().__init__(board, f"({f.name}⊗{g.name})")
        self.f, self.g = f, g

    def _component_views(self, view):
        p = view.entries[0].move.pay
        fv = Play(self.f.board, (Entry(SRC, Move((), p[1]), None, ()),))
        gv = Play(self.g.board, (Entry(SRC, Move((), p[2]), None, ()),))
        return fv, gv

    def initial_response(self, view):
        fv, gv = self._component_views(view)
        rf = self.f.respond(fv)
        if rf is None:
            return None
        rg = self.g.respond(gv)
        if rg is None:
            return None
        rg = _freshen(rg, set(support(view)) | set(atoms_of(rf)) | set(rf.delta))
        pay = (PAIR, rf.move.pay, rg.move.pay)
        return Response(TGT, Move((), pay), 0, tuple(rf.delta) + tuple(rg.delta))

    def inner_for(self, view):
        side = view.entries[2].move.addr[0]
        inner = self.f if side == "l" else self.g
        fv, gv = self._component_views(view)
        own0 = fv if side == "l" else gv
        r_own = inner.respond(own0)

        def comp_map(comp, move):
            assert move.addr[:1] == (side,), f"thread broken at {move}"
            return comp, Move(move.addr[1:], move.pay)

        entries = list(own0.entries)
        entries.append(Entry(TGT, r_own.move, 0, r_own.delta))
        entries += translate_entries(view, 2, comp_map, lambda j, e: j)
        iview = Play(inner.board, tuple(entries))

        def back(r: Response) -> Response:
            return Response(
                r.comp, Move((side,) + r.move.addr, r.move.pay), r.justifier, r.delta
            )

        return inner, iview, back


class LiftF(TransformStrategy):
    """f_⊥ : lift(a) -> lift(a'):  four stars, then behave like f."""

    def __init__(self, f: Strategy):
        super().__init__(
            Board(Lift(f.board.src), Lift(f.board.tgt)), f"lift({f.name})"
        )
        self.f = f

    def respond_raw(self, view):
        n = len(view)
        if n == 1:
            return Response(TGT, Move((), STAR1), 0)
        if n == 3:
            return Response(SRC, Move(("u",), STAR2), 0)
        inner_entries = []
        for idx in range(4, n):
            e = view.entries[idx]
            move = Move(e.move.addr[1:], e.move.pay)
            j = e.justifier
            if j == 3:
                j = None
            elif j == 2:
                j = 0  # target-initial anchor
            else:
                j = j - 4
            inner_entries.append(Entry(e.comp, move, j, e.delta))
        iview = Play(self.f.board, tuple(inner_entries))
        r = self.f.respond(iview)
        if r is None:
            return None
        if r.comp == TGT and r.move.addr == () and r.justifier == 0:
            just = 2
        elif r.justifier == 0:
            just = 4
        else:
            just = r.justifier + 4
        return Response(r.comp, Move(("a",) + r.move.addr, r.move.pay), just, r.delta)


def _imp_parts(c: Arena):
    """Shape analysis for currying targets: Lift(z) or Imp(s, z)."""
    if isinstance(c, Lift):
        return None, c.inner
    if isinstance(c, Imp):
        return c.src, c.tgt
    raise ValueError(f"currying needs a lifted or arrow-shaped target, got {c}")


class LambdaC(TransformStrategy):
    """Λ(f) : x -> (b => z-ish)  from  f : x ⊗ b -> c."""

    def __init__(self, f: Strategy):
        src = f.board.src
        assert isinstance(src, Tensor), f"currying needs a tensor source: {src}"
        x, b = src.left, src.right
        s, z = _imp_parts(f.board.tgt)
        tgt = Imp(b if s is None else Tensor(b, s), z)
        super().__init__(Board(x, tgt), f"Λ({f.name})")
        self.f = f
        self.with_store = s is not None

    def initial_response(self, view):
        return Response(TGT, Move((), STAR), 0)

    def inner_for(self, view):
        merged = view.entries[2].move
        assert merged.addr == ("j",), f"expected a merged move, got {merged}"
        if self.with_store:
            pb, ps = merged.pay[1][1], merged.pay[1][2]
        else:
            pb, ps = merged.pay[1], None
        p0 = view.entries[0].move.pay
        entries = [Entry(SRC, Move((), (PAIR, p0, pb)), None, ())]
        if self.with_store:
            entries.append(Entry(TGT, Move((), STAR), 0, view.entries[1].delta))
            entries.append(Entry(TGT, Move(("j",), (MERGE, ps)), 1, ()))
        else:
            entries.append(Entry(TGT, Move((), STAR1), 0, view.entries[1].delta))
            entries.append(Entry(TGT, Move(("u",), STAR2), 1, ()))

        def comp_map(comp, move):
            if comp == SRC:
                return SRC, Move(("l",) + move.addr, move.pay)
            if move.addr[:2] == ("a", "l") and self.with_store:
                return SRC, Move(("r",) + move.addr[2:], move.pay)
            if move.addr[:1] == ("a",) and not self.with_store:
                return SRC, Move(("r",) + move.addr[1:], move.pay)
            if move.addr[:2] == ("a", "r") and self.with_store:
                return TGT, Move(("a",) + move.addr[2:], move.pay)
            if move.addr[:1] == ("b",):
                if self.with_store:
                    return TGT, move
                return TGT, Move(("a",) + move.addr[1:], move.pay)
            raise OracleError(f"Λ: unplaceable move {move}")

        def just_map(j, e):
            if j == 2 and e.comp == TGT and e.move.addr[:2] == ("a", "l"):
                return 0
            if j == 2 and e.move.addr[:1] == ("a",) and not self.with_store:
                return 0
            return j

        entries += translate_entries(view, 3, comp_map, just_map)
        iview = Play(self.f.board, tuple(entries))

        def back(r: Response) -> Response:
            comp, move, j = r.comp, r.move, r.justifier
            if comp == SRC and move.addr[:1] == ("l",):
                return Response(SRC, Move(move.addr[1:], move.pay), j, r.delta)
            if comp == SRC and move.addr[:1] == ("r",):
                new_addr = (("a", "l") if self.with_store else ("a",)) + move.addr[1:]
                return Response(TGT, Move(new_addr, move.pay), 2 if j == 0 else j, r.delta)
            if comp == TGT and move.addr[:1] == ("a",):
                if self.with_store:
                    return Response(
                        TGT, Move(("a", "r") + move.addr[1:], move.pay),
                        j, r.delta,
                    )
                return Response(
                    TGT, Move(("b",) + move.addr[1:], move.pay), j, r.delta
                )
            if comp == TGT and move.addr[:1] == ("b",) and self.with_store:
                return Response(TGT, move, j, r.delta)
            raise OracleError(f"Λ: unplaceable response {r}")

        return self.f, iview, back


class LambdaInv(TransformStrategy):
    """Λ⁻¹(g) : x ⊗ b -> c  from  g : x -> (b => z-ish)."""

    def __init__(self, g: Strategy, c: Arena):
        tgt = g.board.tgt
        assert isinstance(tgt, Imp), f"uncurrying needs an arrow target: {tgt}"
        s, z = _imp_parts(c)
        if s is None:
            b = tgt.src
        else:
            assert isinstance(tgt.src, Tensor)
            b = tgt.src.left
        super().__init__(Board(Tensor(g.board.src, b), c), f"Λ'({g.name})")
        self.g = g
        self.with_store = s is not None

    def initial_response(self, view):
        r = self.g.respond(
            Play(
                self.g.board,
                (Entry(SRC, Move((), view.entries[0].move.pay[1]), None, ()),),
            )
        )
        if r is None:
            return None
        pt = STAR1 if not self.with_store else STAR
        return Response(TGT, Move((), pt), 0, r.delta)

    def inner_for(self, view):
        p0 = view.entries[0].move.pay
        px, pb = p0[1], p0[2]
        lvl1 = view.entries[2].move
        entries = [Entry(SRC, Move((), px), None, ())]
        entries.append(Entry(TGT, Move((), STAR), 0, view.entries[1].delta))
        if self.with_store:
            assert lvl1.addr == ("j",)
            ps = lvl1.pay[1]
            entries.append(
                Entry(TGT, Move(("j",), (MERGE, (PAIR, pb, ps))), 1, ())
            )
        else:
            assert lvl1.addr == ("u",)
            entries.append(Entry(TGT, Move(("j",), (MERGE, pb)), 1, ()))

        def comp_map(comp, move):
            if comp == SRC and move.addr[:1] == ("l",):
                return SRC, Move(move.addr[1:], move.pay)
            if comp == SRC and move.addr[:1] == ("r",):
                new_addr = (("a", "l") if self.with_store else ("a",)) + move.addr[1:]
                return TGT, Move(new_addr, move.pay)
            if comp == TGT and move.addr[:1] == ("a",):
                if self.with_store:
                    return TGT, Move(("a", "r") + move.addr[1:], move.pay)
                return TGT, Move(("b",) + move.addr[1:], move.pay)
            if comp == TGT and move.addr[:1] == ("b",) and self.with_store:
                return TGT, move
            raise OracleError(f"Λ⁻¹: unplaceable move {move}")

        def just_map(j, e):
            if j == 0 and e.comp == SRC and e.move.addr[:1] == ("r",):
                return 2
            if j == 2 and e.comp == TGT and e.move.addr[:1] == ("a",) and self.with_store:
                return 2
            return j

        entries += translate_entries(view, 3, comp_map, just_map)
        iview = Play(self.g.board, tuple(entries))

        def back(r: Response) -> Response:
            comp, move, j = r.comp, r.move, r.justifier
            if comp == SRC:
                return Response(SRC, Move(("l",) + move.addr, move.pay), j, r.delta)
            if self.with_store and move.addr[:2] == ("a", "l"):
                return Response(
                    SRC, Move(("r",) + move.addr[2:], move.pay),
                    0 if j == 2 else j, r.delta,
                )
            if not self.with_store and move.addr[:1] == ("a",):
                return Response(
                    SRC, Move(("r",) + move.addr[1:], move.pay),
                    0 if j == 2 else j, r.delta,
                )
            if self.with_store and move.addr[:2] == ("a", "r"):
                return Response(TGT, Move(("a",) + move.addr[2:], move.pay), j, r.delta)
            if move.addr[:1] == ("b",):
                if self.with_store:
                    return Response(TGT, move, j, r.delta)
                return Response(
                    TGT, Move(("a",) + move.addr[1:], move.pay), j, r.delta
                )
            raise OracleError(f"Λ⁻¹: unplaceable response {r}")

        return self.g, iview, back


def ev(b: Arena, c: Arena) -> Strategy:
    """Evaluation (b => c-ish) ⊗ b -> c-ish."""
    arrow = mk_merge_shape(b, c)
    return LambdaInv(identity(arrow), c)


def mk_merge_shape(b: Arena, c: Arena) -> Arena:
    s, z = _imp_parts(c)
    return Imp(b if s is None else Tensor(b, s), z)


class TotalRestrict(TransformStrategy):
    """Restrict to one initial orbit; other initials get the bare point."""

    def __init__(self, inner: Strategy, init_pay):
        super().__init__(inner.board, f"{inner.name}|init")
        self.inner = inner
        from .nominal import orbit_canon

        self.init_key = orbit_canon(init_pay)[0]

    def _matches(self, pay) -> bool:
        from .nominal import orbit_canon

        return orbit_canon(pay)[0] == self.init_key

    def respond_raw(self, view):
        if self._matches(view.entries[0].move.pay):
            return self.inner.respond(view)
        if len(view) == 1 and self.board.tgt.is_pointed():
            return Response(TGT, Move((), self.board.tgt.point()), 0)
        return None


# ---------------------------------------------------------------------------
# Composition: n-ary parallel interaction replayed against the view
# ---------------------------------------------------------------------------

@dataclass
class UEntry:
    iface: int
    move: Move
    justifier: Optional[int]
    delta: tuple[Atom, ...]
    owner: int  # 0 = environment, else strategy index (1-based)

    def _iter_atoms_(self):
        yield from atoms_of(self.move)
        yield from self.delta

    def _map_atoms_(self, pi):
        return UEntry(
            self.iface,
            self.move._map_atoms_(pi),
            self.justifier,
            tuple(pi(a) for a in self.delta),
            self.owner,
        )


class ChainStrategy(Strategy):
    """Composite of a chain of strategies, each on adjacent interfaces."""

    def __init__(self, parts: list[Strategy], step_budget: Optional[int] = None):
        assert parts
        for a, b in zip(parts, parts[1:]):
            if a.board.tgt != b.board.src:
                raise ValueError(
                    f"cannot chain {a.name}:{a.board} with {b.name}:{b.board}"
                )
        board = Board(parts[0].board.src, parts[-1].board.tgt)
        super().__init__(board, ";".join(p.name for p in parts))
        self.parts = parts
        self.step_budget = step_budget

    # -- projections ---------------------------------------------------------
    def _project(self, u: list[UEntry], i: int) -> tuple[Play, list[int]]:
        """The play strategy i (1-based) sees: interfaces i-1 and i."""
        part = self.parts[i - 1]
        lo, hi = i - 1, i
        entries: list[Entry] = []
        origins: list[int] = []
        umap: dict[int, int] = {}
        for idx, e in enumerate(u):
            if e.iface not in (lo, hi):
                continue
            comp = SRC if e.iface == lo else TGT
            j = e.justifier
            if j is not None:
                if u[j].iface not in (lo, hi):
                    # only the initial-move cascade crosses interfaces
                    if not (comp == SRC and part.board.src.is_initial(e.move)):
                        raise OracleError("projection crosses the interface")
                    j = None
                else:
                    j = umap[j]
            delta = e.delta if e.owner == i else ()
            entries.append(Entry(comp, e.move, j, delta))
            umap[idx] = len(entries) - 1
            origins.append(idx)
        return Play(part.board, tuple(entries)), origins

    def _bounce(
        self, u: list[UEntry], receiver: int, taboo: set[Atom]
    ) -> Optional[tuple[int, list[int]]]:
        """Let strategies react until the ball leaves to an outer interface.

        Returns (index of the exit move in u, indices added) or None.
        """
        added: list[int] = []
        budget = self.step_budget or max(64, 16 * len(self.parts) * (len(u) + 2))
        steps = 0
        n = len(self.parts)
        while True:
            steps += 1
            if steps > budget:
                raise CompositionBudget(f"{self.name}: no exit within {budget} steps")
            part = self.parts[receiver - 1]
            play, origins = self._project(u, receiver)
            r = part.respond(pview(play))
            if r is None:
                return None
            # map the view justifier back to u
            view_idx = view_indices(play)
            play_j = view_idx[r.justifier]
            u_j = origins[play_j]
            iface = (receiver - 1) if r.comp == SRC else receiver
            r = _freshen(r, taboo | set(support(tuple(u))))
            u.append(UEntry(iface, r.move, u_j, r.delta, receiver))
            added.append(len(u) - 1)
            if iface == 0 or iface == n:
                return len(u) - 1, added
            receiver = iface if r.comp == SRC else iface + 1

    def respond_raw(self, view: Play) -> Optional[Response]:
        n = len(self.parts)
        u: list[UEntry] = []
        vmap: dict[int, int] = {}
        taboo = set(support(view))
        for i in range(0, len(view), 2):
            e = view.entries[i]
            iface = 0 if e.comp == SRC else n
            just = vmap[e.justifier] if e.justifier is not None else None
            u.append(UEntry(iface, e.move, just, (), 0))
            vmap[i] = len(u) - 1
            receiver = 1 if iface == 0 else n
            out = self._bounce(u, receiver, taboo)
            if out is None:
                return None
            exit_idx, added = out
            deltas = tuple(
                itertools.chain.from_iterable(u[j].delta for j in added)
            )
            if i + 1 < len(view):
                expected = view.entries[i + 1]
                if len(deltas) != len(expected.delta):
                    raise OracleError(
                        f"{self.name}: delta arity mismatch replaying the view"
                    )
                if deltas:
                    mapping = dict(zip(deltas, expected.delta))
                    from .nominal import _complete_to_permutation

                    pi = _complete_to_permutation(mapping)
                    for j in added:
                        u[j] = u[j]._map_atoms_(pi)
            exit_entry = u[exit_idx]
            comp = SRC if exit_entry.iface == 0 else TGT
            if exit_entry.iface == n and self.board.tgt.is_initial(exit_entry.move):
                exit_jv: Optional[int] = 0
            else:
                inv = {ui: vi for vi, ui in vmap.items()}
                exit_jv = inv.get(exit_entry.justifier)
                if exit_jv is None:
                    raise OracleError(
                        f"{self.name}: exit justifier hidden from the view"
                    )
            if i + 1 < len(view):
                expected = view.entries[i + 1]
                if (comp, exit_entry.move, exit_jv) != (
                    expected.comp,
                    expected.move,
                    expected.justifier,
                ):
                    raise OracleError(
                        f"{self.name}: view replay mismatch at {i + 1}: got "
                        f"{comp}:{exit_entry.move}@{exit_jv}, expected "
                        f"{expected.comp}:{expected.move}@{expected.justifier}"
                    )
                vmap[i + 1] = exit_idx
            else:
                return Response(comp, exit_entry.move, exit_jv, deltas)
        raise OracleError("even-length view fed to a strategy")


def compose(*parts: Strategy) -> Strategy:
    """Flatten nested chains so interactions stay one level deep."""
    flat: list[Strategy] = []
    for p in parts:
        if isinstance(p, ChainStrategy):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if len(flat) == 1:
        return flat[0]
    return ChainStrategy(flat)


# ---------------------------------------------------------------------------
# Viewfunctions: enumeration, tables, equality
# ---------------------------------------------------------------------------

@dataclass
class Viewfunction:
    """Canonical table of the even-length P-views reached within a bound."""

    board: Board
    depth: int
    table: frozenset
    plays: dict = field(default_factory=dict, repr=False)

    def __contains__(self, play: Play) -> bool:
        return play.canonical()[0].entries in self.table

    def __len__(self) -> int:
        return len(self.table)


def o_extensions(view: Play, budget: Budget) -> Iterator[Entry]:
    """Legal opponent extensions of an even view: children of its last move."""
    bd = view.board
    if len(view) == 0:
        for m in enum_schemas(bd.src.initials(), budget):
            yield Entry(SRC, m, None, ())
        return
    last = view.entries[-1]
    arena = bd.arena(last.comp)
    here = budget.with_atoms(sorted(support(view), key=Atom._sort_key))
    try:
        kids = list(enum_schemas(arena.children(last.move), here))
    except DepthExceeded:
        kids = []
    for m in kids:
        yield Entry(last.comp, m, len(view) - 1, ())
    if last.comp == SRC and bd.src.is_initial(last.move):
        for m in enum_schemas(bd.tgt.initials(), here):
            yield Entry(TGT, m, len(view) - 1, ())


def viewfunction(
    sigma: Strategy, depth: int, budget: Optional[Budget] = None
) -> Viewfunction:
    """Enumerate viewf(sigma) to views of length <= depth under the budget."""
    budget = budget or Budget()
    cache = getattr(sigma, "_vf_cache", None)
    if cache is None:
        cache = sigma._vf_cache = {}
    key = (depth, budget)
    if key in cache:
        return cache[key]
    table = set()
    plays: dict = {}
    frontier: list[Play] = [Play(sigma.board)]
    while frontier:
        v = frontier.pop()
        for ext in o_extensions(v, budget):
            odd = v.append(ext)
            r = sigma.respond(odd)
            if r is None:
                continue
            even = extend_view(odd, r)
            key = even.canonical()[0].entries
            if key in table:
                continue
            table.add(key)
            plays[key] = even
            if len(even) < depth:
                frontier.append(even)
    out = Viewfunction(sigma.board, depth, frozenset(table), plays)
    cache[key] = out
    return out


class TableStrategy(Strategy):
    """An innocent strategy induced by an explicit viewfunction table."""

    def __init__(self, board: Board, table_plays: Iterable[Play], name="table"):
        super().__init__(board, name)
        self.by_prefix: dict = {}
        for p in table_plays:
            if len(p) % 2 != 0:
                raise ValueError("viewfunction entries must be even-length")
            for cut in range(2, len(p) + 1, 2):
                q = Play(board, p.entries[:cut])
                ckey = Play(board, q.entries[:-1]).canonical()[0].entries
                prev = self.by_prefix.get(ckey)
                if prev is not None:
                    if prev.canonical()[0].entries != q.canonical()[0].entries:
                        raise ValueError(
                            "determinacy collision inserting a table entry"
                        )
                    continue
                self.by_prefix[ckey] = q

    def respond_raw(self, view):
        hit = self.by_prefix.get(view.canonical()[0].entries)
        if hit is None:
            return None
        # transport the stored answer onto this (canonical) view
        stored_prefix = Play(hit.board, hit.entries[:-1])
        pi = canonical_perm(stored_prefix)
        answer = hit.entries[-1]._map_atoms_(pi)
        return Response(answer.comp, answer.move, answer.justifier, answer.delta)


def strat_of_viewf(vf: Viewfunction) -> Strategy:
    return TableStrategy(vf.board, list(vf.plays.values()), name="strat(f)")


def viewf_of_strat(sigma: Strategy, depth: int, budget=None) -> Viewfunction:
    return viewfunction(sigma, depth, budget)


def strategy_equal(s1: Strategy, s2: Strategy, depth: int, budget=None) -> bool:
    if s1.board != s2.board:
        raise ValueError(f"board mismatch: {s1.board} vs {s2.board}")
    return (
        viewfunction(s1, depth, budget).table == viewfunction(s2, depth, budget).table
    )


def strategy_leq(s1: Strategy, s2: Strategy, depth: int, budget=None) -> bool:
    if s1.board != s2.board:
        raise ValueError(f"board mismatch: {s1.board} vs {s2.board}")
    return viewfunction(s1, depth, budget).table <= viewfunction(s2, depth, budget).table


def strategy_diff(s1: Strategy, s2: Strategy, depth: int, budget=None) -> list[str]:
    v1, v2 = viewfunction(s1, depth, budget), viewfunction(s2, depth, budget)
    out = []
    for key in sorted(v1.table - v2.table, key=repr)[:3]:
        out.append("only-left:\n" + v1.plays[key].pretty())
    for key in sorted(v2.table - v1.table, key=repr)[:3]:
        out.append("only-right:\n" + v2.plays[key].pretty())
    return out


# ---------------------------------------------------------------------------
# Totality classes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TotalityClass:
    total: bool
    l4: bool
    t4: bool
    tl4: bool
    ttotal: bool
    starred: Optional[tuple[bool, bool, bool]]  # (l4*, t4*, tl4*)
    bound: int

    def __post_init__(self):
        if self.ttotal:
            assert self.tl4
        if self.tl4:
            assert self.t4 and self.l4
        if self.t4 or self.l4:
            assert self.total


def classify(sigma: Strategy, depth: int = 6, budget=None) -> TotalityClass:
    """Bounded verification of the totality classes."""
    budget = budget or Budget()
    vf = viewfunction(sigma, depth, budget)
    total = True
    for ext in o_extensions(Play(sigma.board), budget):
        if sigma.respond(Play(sigma.board, (ext,))) is None:
            total = False
    t4 = total
    ttotal_extra = total
    l4 = total
    starred = None
    # t4 / ttotal: responses to [i_A i_B j_B]
    for key, play in vf.plays.items():
        if len(play) < 2:
            continue
        two = Play(sigma.board, play.entries[:2])
        here = budget.with_atoms(sorted(support(two), key=Atom._sort_key))
        for ext in o_extensions(two, here):
            if ext.comp != TGT:
                continue
            if sigma.board.tgt.level(ext.move) != 1:
                continue
            r = sigma.respond(two.append(ext))
            if r is None or r.comp != SRC or sigma.board.src.level(r.move) != 1:
                t4 = False
                ttotal_extra = False
            elif r.delta:
                ttotal_extra = False
    # l4: any view ending with a source level-1 move has length exactly 4
    for key, play in vf.plays.items():
        last = play.entries[-1]
        if last.comp == SRC:
            try:
                lvl = sigma.board.src.level(last.move)
            except Exception:
                continue
            if lvl == 1 and len(play) != 4:
                l4 = False
    tl4 = t4 and l4
    ttotal = tl4 and ttotal_extra
    if isinstance(sigma.board.src, Tensor):
        l4s = total
        t4s = total
        for key, play in vf.plays.items():
            last = play.entries[-1]
            if last.comp == SRC and last.move.addr[:1] == ("r",):
                try:
                    lvl = sigma.board.src.right.level(
                        Move(last.move.addr[1:], last.move.pay)
                    )
                except Exception:
                    continue
                if lvl == 1 and len(play) != 4:
                    l4s = False
        for key, play in vf.plays.items():
            if len(play) < 2:
                continue
            two = Play(sigma.board, play.entries[:2])
            here = budget.with_atoms(sorted(support(two), key=Atom._sort_key))
            for ext in o_extensions(two, here):
                if ext.comp != TGT or sigma.board.tgt.level(ext.move) != 1:
                    continue
                r = sigma.respond(two.append(ext))
                if r is None or r.comp != SRC or r.move.addr[:1] != ("r",):
                    t4s = False
        starred = (l4s, t4s, l4s and t4s)
    return TotalityClass(total, l4, t4, tl4, ttotal, starred, depth)


class SeparateHead(TransformStrategy):
    """f~ : a ⊗ a -> b with the first source interrogation in the right copy
    and all later ones in the left, so that Δ;f~ = f."""

    def __init__(self, f: Strategy):
        a = f.board.src
        assert a.is_pointed(), "head separation needs a pointed source"
        super().__init__(Board(Tensor(a, a), f.board.tgt), f"sep({f.name})")
        self.f = f

    def initial_response(self, view):
        p = view.entries[0].move.pay
        inner = Play(self.f.board, (Entry(SRC, Move((), p[2]), None, ()),))
        r = self.f.respond(inner)
        return r

    def inner_for(self, view):
        p = view.entries[0].move.pay

        def comp_map(comp, move):
            if comp == SRC:
                return SRC, Move(move.addr[1:], move.pay)
            return comp, move

        entries = [Entry(SRC, Move((), p[2]), None, ())]
        entries += translate_entries(view, 1, comp_map, lambda j, e: j)
        iview = Play(self.f.board, tuple(entries))
        src_done = any(e.comp == SRC for e in view.entries[1:])

        def back(r: Response) -> Response:
            if r.comp == SRC:
                side = "l" if src_done else "r"
                return Response(
                    SRC, Move((side,) + r.move.addr, r.move.pay), r.justifier, r.delta
                )
            return r

        return self.f, iview, back


def separate_head(f: Strategy) -> Strategy:
    return SeparateHead(f)


def determinacy_fuzz(sigma: Strategy, depth: int, budget=None) -> Optional[str]:
    """Search for an orbit-collision: two equivalent views with inequivalent
    responses.  Returns a description or None."""
    budget = budget or Budget()
    seen: dict = {}
    frontier: list[Play] = [Play(sigma.board)]
    while frontier:
        v = frontier.pop()
        for ext in o_extensions(v, budget):
            odd = v.append(ext)
            r = sigma.respond(odd)
            if r is None:
                continue
            ckey = odd.canonical()[0].entries
            rkey = extend_view(odd, r).canonical()[0].entries
            if ckey in seen and seen[ckey] != rkey:
                return f"determinacy broken after {odd.pretty()}"
            seen[ckey] = rkey
            even = extend_view(odd, r)
            if len(even) < depth:
                frontier.append(even)
    return None



# ---------------------------------------------------------------------------
# Random play-level interactions (test fuel for composition and tidiness)
# ---------------------------------------------------------------------------

def legal_o_extensions_of_play(p: Play, budget: Budget):
    """Opponent extensions of an even-length *play* (not just a view)."""
    from .plays import check_play, oview, view_indices

    bd = p.board
    if len(p) == 0:
        yield from (Entry(SRC, m, None, ()) for m in enum_schemas(bd.src.initials(), budget))
        return
    here = budget.with_atoms(sorted(support(p), key=Atom._sort_key))
    seen = set()
    for j in view_indices(p, player=False):
        if p.polarity(j) != "P":
            continue
        e = p.entries[j]
        try:
            kids = list(enum_schemas(bd.arena(e.comp).children(e.move), here))
        except DepthExceeded:
            continue
        for m in kids:
            cand = Entry(e.comp, m, j, ())
            key = (cand.comp, cand.move, cand.justifier)
            if key in seen:
                continue
            seen.add(key)
            if check_play(p.append(cand), mode="plain").ok:
                yield cand


def random_interaction(sigma: Strategy, tau: Strategy, rng, steps: int, budget: Budget):
    """Random legal environment against sigma;tau, returning the component
    plays (s, t) it induces.  None when the walk dies immediately."""
    from .plays import pview_with_origins

    chain = ChainStrategy([sigma, tau])
    n = 2
    u: list[UEntry] = []
    composite = Play(chain.board)
    for _ in range(steps):
        opts = list(legal_o_extensions_of_play(composite, budget))
        if not opts:
            break
        ext = rng.choice(opts)
        u_j = None
        if ext.justifier is not None:
            # composite play indices map to u indices of outer entries
            outer = [i for i, e in enumerate(u) if e.iface in (0, n)]
            u_j = outer[ext.justifier]
        u.append(UEntry(0 if ext.comp == SRC else n, ext.move, u_j, (), 0))
        receiver = 1 if ext.comp == SRC else n
        out = chain._bounce(u, receiver, set(support(composite)))
        if out is None:
            u.pop()
            break
        exit_idx, _ = out
        exit_entry = u[exit_idx]
        outer = [i for i, e in enumerate(u) if e.iface in (0, n)]
        remap = {ui: k for k, ui in enumerate(outer)}
        comp_entries = []
        pending: list[Atom] = []
        last_seen = -1
        for ui in outer:
            pending = [
                a
                for j in range(last_seen + 1, ui)
                if u[j].iface not in (0, n)
                for a in u[j].delta
            ]
            last_seen = ui
            e = u[ui]
            j = e.justifier
            while j is not None and u[j].iface not in (0, n):
                j = u[j].justifier
            delta = tuple(pending) + tuple(e.delta) if e.owner != 0 else e.delta
            comp_entries.append(
                Entry(SRC if e.iface == 0 else TGT, e.move,
                      remap[j] if j is not None else None, delta)
            )
        composite = Play(chain.board, tuple(comp_entries))
    s_play, _ = chain._project(u, 1)
    t_play, _ = chain._project(u, n)
    return s_play, t_play, composite


# ---------------------------------------------------------------------------
# Dispatcher facades over the primitive constructors
# ---------------------------------------------------------------------------

def basic_strategy(kind: str, **params) -> Strategy:
    """Basic arrows by name: numerals, terminal, name projections,
    identities, diagonal, equality, tensor projections, pairing."""
    if kind == "numeral":
        return Numeral(params["n"])
    if kind == "bang":
        return Bang(params["src"])
    if kind == "name-proj":
        return NameListProj(params["positions"], params["src"])
    if kind == "id":
        return identity(params["arena"])
    if kind == "diagonal":
        return Diagonal(params["arena"])
    if kind == "eq":
        g = Names((params["family"],))
        return EqStrat(Tensor(g, g))
    if kind == "projection":
        return PathProjection(params["src"], params["path"])
    if kind == "pairing":
        return Pairing(params["f"], params["g"])
    raise ValueError(f"unknown basic strategy {kind!r}")


def combinator(kind: str, **params) -> Strategy:
    """Structural combinators: tensor, lift, currying and evaluation."""
    if kind == "tensor":
        return TensorOf(params["f"], params["g"])
    if kind == "lift":
        return LiftF(params["f"])
    if kind == "curry":
        return LambdaC(params["f"])
    if kind == "uncurry":
        return LambdaInv(params["g"], params["target"])
    if kind == "ev":
        return ev(params["arg"], params["target"])
    raise ValueError(f"unknown combinator {kind!r}")


def monad_comonad(kind: str, **params) -> Strategy:
    """Lifting-monad and initial-state pieces by name."""
    if kind == "up":
        return Up(params["arena"])
    if kind == "dn":
        return Dn(params["arena"])
    if kind == "st":
        return St(params["left"], params["right"])
    if kind == "pu":
        return Pu(params["arena"])
    if kind == "new":
        return NewName(params["sig"], params["family"], params["arena"])
    if kind == "binom":
        return Binom(params["sig"], params["positions"], params["families"])
    if kind == "epsilon":
        src = Tensor(Names(params["sig"]), params["arena"])
        return PathProjection(src, ("r",))
    if kind == "delta":
        n = Names(params["sig"])
        a = params["arena"]
        return compose(
            TensorOf(Diagonal(n), identity(a)), assoc_rt(n, n, a)
        )
    raise ValueError(f"unknown monad/comonad piece {kind!r}")

"""Shared generators and helpers for the test suite."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from piterm.checker import TypeEnv, check, subtype
from piterm.syntax import (
    NAT,
    UNIT,
    Add,
    ChanT,
    In,
    Mul,
    Name,
    NatLit,
    NameRef,
    Nil,
    Out,
    Par,
    Process,
    RepIn,
    Res,
    Star,
    Type,
    Value,
    fresh,
)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240811)


# ---------------------------------------------------------------------------
# Random types


def gen_type(rng: random.Random, depth: int, max_level: int = 4) -> Type:
    if depth <= 0 or rng.random() < 0.25:
        return rng.choice([UNIT, UNIT, NAT])
    cap = rng.choice(["#", "#", "o", "i"])
    level = rng.randrange(max_level + 1)
    arity = rng.choice([1, 1, 1, 2])
    return ChanT(cap, level, tuple(gen_type(rng, depth - 1, max_level) for _ in range(arity)))


def sample_subtype(rng: random.Random, t: Type) -> Type:
    """Some type <= t."""
    if not isinstance(t, ChanT):
        return t
    if t.cap == "#":
        return t
    if t.cap == "o":
        if rng.random() < 0.5:
            level = rng.randrange(t.level + 1)
            payload = tuple(sample_supertype(rng, p) for p in t.payload)
            cap = rng.choice(["o", "#"])
            return ChanT(cap, level, payload)
        return t
    # input capability: subtypes raise the level and shrink the payload
    if rng.random() < 0.5:
        level = t.level + rng.randrange(3)
        payload = tuple(sample_subtype(rng, p) for p in t.payload)
        cap = rng.choice(["i", "#"])
        return ChanT(cap, level, payload)
    return t


def sample_supertype(rng: random.Random, t: Type) -> Type:
    """Some type >= t."""
    if not isinstance(t, ChanT):
        return t
    if t.cap == "#":
        pick = rng.random()
        if pick < 0.34:
            return t
        if pick < 0.67:
            level = t.level + rng.randrange(3)
            payload = tuple(sample_subtype(rng, p) for p in t.payload)
            return ChanT("o", level, payload)
        level = rng.randrange(t.level + 1)
        payload = tuple(sample_supertype(rng, p) for p in t.payload)
        return ChanT("i", level, payload)
    if t.cap == "o":
        level = t.level + rng.randrange(3)
        payload = tuple(sample_subtype(rng, p) for p in t.payload)
        return ChanT("o", level, payload)
    level = rng.randrange(t.level + 1)
    payload = tuple(sample_supertype(rng, p) for p in t.payload)
    return ChanT("i", level, payload)


# ---------------------------------------------------------------------------
# Type-directed generation of well-typed processes


def _pick_value(rng: random.Random, env: dict[Name, Type], want: Type, exact: bool) -> Value | None:
    if isinstance(want, UNIT.__class__):
        candidates: list[Value] = [Star()]
        for n, t in env.items():
            if t == UNIT:
                candidates.append(NameRef(n))
        return rng.choice(candidates)
    if want == NAT:
        k = rng.randrange(4)
        if rng.random() < 0.3:
            return Add(NatLit(k), Mul(NatLit(rng.randrange(3)), NatLit(rng.randrange(3))))
        return NatLit(k)
    fits = [
        n
        for n, t in env.items()
        if (t == want if exact else subtype(t, want))
    ]
    if not fits:
        return None
    return NameRef(rng.choice(fits))


def gen_typed_process(
    rng: random.Random,
    env: dict[Name, Type],
    fuel: int,
    exact: bool = False,
    max_level: int = 4,
) -> tuple[Process, int]:
    """A process well typed under `env`, along with its least weight.

    With `exact=True` payload values match the expected type syntactically and
    generated annotations use the full capability only, so the result is also
    accepted by the restricted checker.
    """
    if fuel <= 0:
        return Nil(), 0

    def make_output(n: Name, t: ChanT) -> Out | None:
        values = []
        for want in t.payload:
            v = _pick_value(rng, env, want, exact)
            if v is None:
                return None
            values.append(v)
        return Out(n, tuple(values))

    roll = rng.random()
    if roll < 0.22:
        # rendezvous: an output racing a matching input, so reductions happen
        chans = [(n, t) for n, t in env.items() if isinstance(t, ChanT) and t.cap == "#"]
        rng.shuffle(chans)
        for n, t in chans:
            out = make_output(n, t)
            if out is None:
                continue
            binders = tuple(fresh(rng.choice("xyzuvw")) for _ in t.payload)
            inner = dict(env)
            for b, bt in zip(binders, t.payload):
                inner[b] = bt
            body, w = gen_typed_process(rng, inner, fuel - 2, exact, max_level)
            if rng.random() < 0.5 and t.level > w:
                return Par(out, RepIn(n, binders, body)), t.level
            return Par(out, In(n, binders, body)), max(t.level, w)
        return Nil(), 0
    if roll < 0.38:
        sendable = [
            (n, t)
            for n, t in env.items()
            if isinstance(t, ChanT) and (t.cap == "#" if exact else t.cap in ("#", "o"))
        ]
        rng.shuffle(sendable)
        for n, t in sendable:
            out = make_output(n, t)
            if out is not None:
                return out, t.level
        return Nil(), 0
    if roll < 0.58:
        receivable = [
            (n, t)
            for n, t in env.items()
            if isinstance(t, ChanT) and (t.cap == "#" if exact else t.cap in ("#", "i"))
        ]
        if not receivable:
            return Nil(), 0
        n, t = rng.choice(receivable)
        binders = tuple(fresh(rng.choice("xyzuvw")) for _ in t.payload)
        inner = dict(env)
        for b, bt in zip(binders, t.payload):
            inner[b] = bt
        body, w = gen_typed_process(rng, inner, fuel - 1, exact, max_level)
        if rng.random() < 0.5 and t.level > w:
            return RepIn(n, binders, body), 0
        return In(n, binders, body), w
    if roll < 0.72:
        name = fresh(rng.choice("abcdrs"))
        if exact:
            ann = ChanT("#", rng.randrange(max_level + 1), (rng.choice([UNIT, NAT]),))
        else:
            ann = gen_type(rng, 2, max_level)
            if not isinstance(ann, ChanT):
                ann = ChanT("#", rng.randrange(max_level + 1), (UNIT,))
        inner = dict(env)
        inner[name] = ann
        body, w = gen_typed_process(rng, inner, fuel - 1, exact, max_level)
        return Res(name, ann, False, body), w
    if roll < 0.92:
        left, w1 = gen_typed_process(rng, env, fuel // 2, exact, max_level)
        right, w2 = gen_typed_process(rng, env, fuel // 2, exact, max_level)
        return Par(left, right), max(w1, w2)
    return Nil(), 0


def gen_env_pool(rng: random.Random, exact: bool = False, max_level: int = 4) -> dict[Name, Type]:
    """A few channels to seed generation, biased towards usable shapes."""
    pool: dict[Name, Type] = {}
    pool[fresh("a")] = ChanT("#", rng.randrange(1, max_level + 1), (UNIT,))
    pool[fresh("b")] = ChanT("#", rng.randrange(max_level + 1), (NAT,))
    pool[fresh("t")] = UNIT
    if exact:
        pool[fresh("c")] = ChanT("#", rng.randrange(max_level + 1), (ChanT("#", 1, (UNIT,)),))
        pool[fresh("d")] = ChanT("#", 1, (UNIT,))
    else:
        pool[fresh("c")] = ChanT(
            "#", rng.randrange(max_level + 1), (ChanT("o", rng.randrange(max_level + 1), (UNIT,)),)
        )
        for _ in range(2):
            t = gen_type(rng, 3, max_level)
            if isinstance(t, ChanT):
                pool[fresh(rng.choice("defg"))] = t
    return pool


def typed_instance(rng: random.Random, fuel: int = 7, exact: bool = False) -> tuple[TypeEnv, Process, int]:
    """Generate, then cross-check the tracked weight against the checker."""
    pool = gen_env_pool(rng, exact)
    p, w = gen_typed_process(rng, pool, fuel, exact)
    env = TypeEnv(dict(pool))
    assert check(env, p) == w
    return env, p, w

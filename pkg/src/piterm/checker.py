"""Level-based capability type checker.

`check` returns the least derivable weight of a process: outputs weigh the
declared level of their subject, replicated inputs demand a subject level
strictly above the weight of their body, parallel composition takes the
maximum. `check_ds` is the restricted mode with full-capability channels
only and syntactic payload equality instead of subtyping.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    CapabilityError,
    LevelViolation,
    MissingAnnotation,
    PayloadMismatch,
    SortError,
    UnboundName,
)
from .syntax import (
    IN,
    OUT,
    SHARP,
    STAR,
    UNIT,
    Add,
    ChanT,
    In,
    Mul,
    Name,
    NatLit,
    NameRef,
    NatT,
    Nil,
    Out,
    Par,
    Process,
    RepIn,
    Res,
    Star,
    Type,
    UnitT,
    Value,
    free_names,
    pretty_process,
    pretty_type,
    pretty_value,
)


@dataclass(frozen=True)
class TypeEnv:
    """Finite map from names to types; binding an already-bound name is an error."""

    bindings: dict[Name, Type] = field(default_factory=dict)

    def get(self, name: Name) -> Type:
        try:
            return self.bindings[name]
        except KeyError:
            raise UnboundName(f"name {name.display!r} is not in the environment") from None

    def __contains__(self, name: Name) -> bool:
        return name in self.bindings

    def bind(self, name: Name, ty: Type) -> TypeEnv:
        if name in self.bindings:
            raise UnboundName(f"name {name.display!r} is already bound")
        new = dict(self.bindings)
        new[name] = ty
        return TypeEnv(new)

    def bind_all(self, pairs: list[tuple[Name, Type]]) -> TypeEnv:
        env = self
        for name, ty in pairs:
            env = env.bind(name, ty)
        return env

    def items(self) -> list[tuple[Name, Type]]:
        return sorted(self.bindings.items(), key=lambda kv: (kv[0].display, kv[0].id))


def env_for(p: Process, declarations: dict[str, Type]) -> TypeEnv:
    """Build an environment for the free names of `p` from spelling-keyed types."""
    by_display: dict[str, Name] = {}
    for n in free_names(p):
        by_display.setdefault(n.display, n)
    bindings = {}
    for spelling, ty in declarations.items():
        if spelling in by_display:
            bindings[by_display[spelling]] = ty
    return TypeEnv(bindings)


# ---------------------------------------------------------------------------
# Subtyping


def subtype(s: Type, u: Type) -> bool:
    """Decide s <= u for the capability-and-level subtype order."""
    if isinstance(s, UnitT) and isinstance(u, UnitT):
        return True
    if isinstance(s, NatT) and isinstance(u, NatT):
        return True
    if isinstance(s, ChanT) and isinstance(u, ChanT):
        if len(s.payload) != len(u.payload):
            return False
        if u.cap == IN:
            return (
                s.cap in (SHARP, IN)
                and s.level >= u.level
                and all(subtype(a, b) for a, b in zip(s.payload, u.payload))
            )
        if u.cap == OUT:
            return (
                s.cap in (SHARP, OUT)
                and s.level <= u.level
                and all(subtype(b, a) for a, b in zip(s.payload, u.payload))
            )
        return s.cap == SHARP and s.level == u.level and s.payload == u.payload
    return False


# ---------------------------------------------------------------------------
# Value typing


def value_type(env: TypeEnv, v: Value) -> Type:
    """Least type of a value: names at their declared type, arithmetic at Nat."""
    if isinstance(v, Star):
        return UNIT
    if isinstance(v, NatLit):
        return NatT()
    if isinstance(v, NameRef):
        return env.get(v.name)
    if isinstance(v, (Add, Mul)):
        for side in (v.left, v.right):
            ty = value_type(env, side)
            if not subtype(ty, NatT()):
                raise SortError(
                    f"arithmetic over a non-Nat value of type {pretty_type(ty)}",
                    where=pretty_value(v),
                )
        return NatT()
    raise TypeError(f"not a value: {v!r}")


# ---------------------------------------------------------------------------
# Process checking


def _subject_chan(env: TypeEnv, subject: Name, want_cap: str, ds: bool, where: str) -> ChanT:
    ty = env.get(subject)
    if not isinstance(ty, ChanT):
        raise CapabilityError(
            f"{subject.display} has non-channel type {pretty_type(ty)}", where=where
        )
    if ds:
        if ty.cap != SHARP:
            raise CapabilityError(
                f"{subject.display} must carry the full capability, has {pretty_type(ty)}",
                where=where,
            )
        return ty
    allowed = (SHARP, want_cap)
    if ty.cap not in allowed:
        kind = "output" if want_cap == OUT else "input"
        raise CapabilityError(
            f"{subject.display}: no {kind} capability in {pretty_type(ty)}", where=where
        )
    return ty


def _payload_types(p: Out | In | RepIn, chan: ChanT, ds: bool, env: TypeEnv) -> None:
    where = pretty_process(p)
    if isinstance(p, Out):
        values = p.payload if p.payload else (STAR,)
        if len(values) != len(chan.payload):
            raise PayloadMismatch(
                f"{p.subject.display} expects {len(chan.payload)} value(s), got {len(values)}",
                where=where,
            )
        for v, want in zip(values, chan.payload):
            got = value_type(env, v)
            ok = got == want if ds else subtype(got, want)
            if not ok:
                raise PayloadMismatch(
                    f"value {pretty_value(v)} : {pretty_type(got)} does not fit {pretty_type(want)}",
                    where=where,
                )
    else:
        if not p.binders:
            # discarded unit input: the channel must carry a single Unit
            if chan.payload != (UNIT,):
                raise PayloadMismatch(
                    f"{p.subject.display} carries {pretty_type(chan)}, "
                    "cannot elide a non-unit message",
                    where=where,
                )
        elif len(p.binders) != len(chan.payload):
            raise PayloadMismatch(
                f"{p.subject.display} expects {len(chan.payload)} binder(s), got {len(p.binders)}",
                where=where,
            )


def _check(env: TypeEnv, p: Process, ds: bool) -> int:
    if isinstance(p, Nil):
        return 0
    if isinstance(p, Par):
        return max(_check(env, p.left, ds), _check(env, p.right, ds))
    if isinstance(p, Out):
        chan = _subject_chan(env, p.subject, OUT, ds, pretty_process(p))
        _payload_types(p, chan, ds, env)
        return chan.level
    if isinstance(p, (In, RepIn)):
        chan = _subject_chan(env, p.subject, IN, ds, pretty_process(p))
        _payload_types(p, chan, ds, env)
        inner = env.bind_all(list(zip(p.binders, chan.payload)))
        w = _check(inner, p.body, ds)
        if isinstance(p, RepIn):
            if not chan.level > w:
                raise LevelViolation(
                    f"replicated input on {p.subject.display}: level {chan.level} "
                    f"does not dominate body weight {w}",
                    where=pretty_process(p),
                )
            return 0
        return w
    if isinstance(p, Res):
        if p.annotation is None:
            raise MissingAnnotation(
                f"restriction on {p.name.display} lacks a type annotation",
                where=pretty_process(p),
            )
        return _check(env.bind(p.name, p.annotation), p.body, ds)
    raise TypeError(f"not a process: {p!r}")


def check(env: TypeEnv, p: Process) -> int:
    """Least weight derivable for `p` under `env`; raises IllTyped otherwise."""
    return _check(env, p, ds=False)


def check_ds(env: TypeEnv, p: Process) -> int:
    """Checker variant with full capabilities only and no subtyping."""
    return _check(env, p, ds=True)

"""Call sites built from guarded handle chains.

A site's ``chain`` is a linked list of :class:`GuardedHandle` nodes ending in
the site's :class:`FallbackHandle`.  A guard is a tuple of discriminators
(host type for operands, shape / structure type / host type for method
receivers, the empty tuple for named function calls, whose target never
depends on the arguments).  When no guard matches, the fallback resolves a
target for the observed discriminators, lets the policy rewrite the chain,
and runs that target for the current call.
"""

from collections import namedtuple
from dataclasses import dataclass

from .methods import method_discriminator

SiteStats = namedtuple("SiteStats", "hits misses relinks depth megamorphic")


@dataclass(frozen=True)
class DispatchPolicy:
    kind: str  # mono | poly | none
    depth: int = 1

    def __post_init__(self):
        if self.kind not in ("mono", "poly", "none"):
            raise ValueError(f"unknown dispatch policy {self.kind!r}")
        if self.depth < 1:
            raise ValueError("policy depth must be >= 1")

    @classmethod
    def parse(cls, text):
        if text == "mono":
            return cls("mono", 1)
        if text == "none":
            return cls("none", 1)
        if text.startswith("poly:"):
            try:
                k = int(text[5:])
            except ValueError:
                raise ValueError(f"bad polymorphic depth in {text!r}") from None
            return cls("poly", k)
        raise ValueError(f"unknown cache policy {text!r} (expected mono, poly:<k> or none)")

    def __str__(self):
        return f"poly:{self.depth}" if self.kind == "poly" else self.kind


MONO = DispatchPolicy("mono")
NONE = DispatchPolicy("none")


class Handle:
    """Chain element.  Targets themselves are plain Python callables."""

    __slots__ = ()


class GuardedHandle(Handle):
    __slots__ = ("guard", "target", "next", "k0", "k1")

    def __init__(self, guard, target, next_):
        self.guard = guard
        self.target = target
        self.next = next_
        self.k0 = guard[0] if len(guard) > 0 else None
        self.k1 = guard[1] if len(guard) > 1 else None


class FallbackHandle(Handle):
    __slots__ = ("site",)

    def __init__(self, site):
        self.site = site


def operand_guard(args):
    return tuple(type(a) for a in args)


def receiver_guard(args):
    return (method_discriminator(args[0]),)


def constant_guard(args):
    return ()


class CallSite:
    """One dispatch point.  ``resolver(site, args)`` returns the target for
    the current arguments; the site computes the guard itself."""

    KINDS = ("operator", "function", "method")

    def __init__(self, site_id, kind, name, argc, resolver, policy=MONO):
        if kind not in self.KINDS:
            raise ValueError(f"bad site kind {kind!r}")
        self.id = site_id
        self.kind = kind
        self.name = name
        self.argc = argc
        self.resolver = resolver
        self.policy = policy
        self.fallback = FallbackHandle(self)
        self.chain = self.fallback
        self.depth = 0
        self.hits = 0
        self.misses = 0
        self.relinks = 0
        self.megamorphic = False
        if kind == "operator":
            self.discriminate = operand_guard
        elif kind == "method":
            self.discriminate = receiver_guard
        else:
            self.discriminate = constant_guard

    # -- fast paths ------------------------------------------------------

    def call1(self, a):
        ta = type(a)
        h = self.chain
        while h.__class__ is GuardedHandle:
            if h.k0 is ta:
                self.hits += 1
                return h.target(a)
            h = h.next
        return self.miss([a])

    def call2(self, a, b):
        ta = type(a)
        tb = type(b)
        h = self.chain
        while h.__class__ is GuardedHandle:
            if h.k0 is ta and h.k1 is tb:
                self.hits += 1
                return h.target(a, b)
            h = h.next
        return self.miss([a, b])

    def invoke(self, args):
        """Function and method sites: the target takes the argument list."""
        h = self.chain
        if h.__class__ is GuardedHandle:
            if self.kind == "function":
                self.hits += 1
                return h.target(args)
            key = method_discriminator(args[0])
            while h.__class__ is GuardedHandle:
                if h.k0 is key:
                    self.hits += 1
                    return h.target(args)
                h = h.next
        return self.miss(args)

    # -- slow path -------------------------------------------------------

    def miss(self, args):
        self.misses += 1
        guard = self.discriminate(args)
        target = self.checked(guard, self.resolver(self, args))
        relink(self, guard, target)
        if self.kind == "operator":
            return target(*args)
        return target(args)

    def checked(self, guard, target):
        return target

    def stats(self):
        return SiteStats(self.hits, self.misses, self.relinks, self.depth, self.megamorphic)

    def guards(self):
        out = []
        h = self.chain
        while h.__class__ is GuardedHandle:
            out.append(h.guard)
            h = h.next
        return out

    def __repr__(self):
        return f"CallSite({self.id}, {self.kind}, {self.name}, {self.policy})"


class CheckedCallSite(CallSite):
    """Debug variant: every installed target re-derives the discriminators of
    the arguments it is actually called with and asserts they equal the guard
    it was installed under."""

    def checked(self, guard, target):
        discriminate = self.discriminate
        if self.kind == "operator":
            def run(*args):
                assert discriminate(args) == guard, (self, guard, args)
                return target(*args)
        else:
            def run(args):
                assert discriminate(args) == guard, (self, guard, args)
                return target(args)
        return run


def relink(site, guard, target):
    """Rewrite ``site.chain`` after a miss, according to the site's policy."""
    policy = site.policy
    if policy.kind == "none" or site.megamorphic:
        return
    if policy.kind == "mono":
        site.chain = GuardedHandle(guard, target, site.fallback)
        site.depth = 1
        site.relinks += 1
        return
    if site.depth < policy.depth:
        site.chain = GuardedHandle(guard, target, site.chain)
        site.depth += 1
        site.relinks += 1
        return
    site.megamorphic = True
    site.chain = site.fallback
    site.depth = 0


def invoke_site(site, args):
    if site.kind == "operator":
        if len(args) == 1:
            return site.call1(args[0])
        return site.call2(args[0], args[1])
    return site.invoke(list(args))


def site_stats(site):
    return site.stats()


def format_site_stats(sites):
    """One line per executed site, sorted by id."""
    lines = []
    for site in sorted(sites, key=lambda s: s.id):
        if site.hits + site.misses == 0:
            continue
        lines.append(
            f"site={site.id} kind={site.kind} name={site.name} hits={site.hits} "
            f"misses={site.misses} relinks={site.relinks} depth={site.depth} "
            f"mega={'true' if site.megamorphic else 'false'}")
    return "\n".join(lines) + ("\n" if lines else "")

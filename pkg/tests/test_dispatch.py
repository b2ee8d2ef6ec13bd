import pytest
from hypothesis import given, strategies as st

from minigolo.dispatch import (
    CallSite, CheckedCallSite, DispatchPolicy, FallbackHandle, GuardedHandle, MONO, NONE,
    format_site_stats, invoke_site,
)
from minigolo.operators import apply_operator, lookup_operator
from minigolo.values import Long

POLY2 = DispatchPolicy.parse("poly:2")


class CountingResolver:
    def __init__(self):
        self.calls = 0

    def __call__(self, site, args):
        self.calls += 1
        return lookup_operator(site.name, *(type(a) for a in args))


def plus_site(policy, cls=CallSite):
    resolver = CountingResolver()
    return cls(0, "operator", "plus", 2, resolver, policy), resolver


def chain_length(site):
    n, h = 0, site.chain
    while isinstance(h, GuardedHandle):
        n, h = n + 1, h.next
    assert isinstance(h, FallbackHandle) and h.site is site
    return n


def test_policy_parsing():
    assert DispatchPolicy.parse("mono") == MONO
    assert DispatchPolicy.parse("poly:4").depth == 4
    assert str(DispatchPolicy.parse("poly:3")) == "poly:3"
    for bad in ("poly", "poly:x", "poly:0", "fast", ""):
        with pytest.raises(ValueError):
            DispatchPolicy.parse(bad)


def test_mono_site_hits_after_first_call():
    site, resolver = plus_site(MONO)
    for i in range(10000):
        assert site.call2(i, 1) == i + 1
    assert resolver.calls == 1
    assert site.stats() == (9999, 1, 1, 1, False)


def test_mono_relinks_on_every_alternation():
    site, resolver = plus_site(MONO)
    for i in range(100):
        site.call2(i if i % 2 else float(i), 2)
    assert site.relinks == 100 and site.misses == 100 and site.hits == 0
    assert chain_length(site) == 1


def test_poly_two_caches_both_kinds():
    site, resolver = plus_site(POLY2)
    for i in range(100):
        site.call2(i if i % 2 else float(i), 2)
    assert site.relinks == 2 and site.misses == 2 and site.hits == 98
    assert chain_length(site) == 2
    assert site.guards() == [(int, int), (float, int)]


def test_poly_goes_megamorphic_past_depth():
    site, resolver = plus_site(POLY2)
    for a in (1, 1.0, Long(1), 2, 2.0):
        site.call2(a, 1)
    assert site.megamorphic and chain_length(site) == 0
    before = resolver.calls
    for a in (1, 1.0, Long(1)):
        site.call2(a, 1)
    assert resolver.calls == before + 3
    assert site.relinks == 2


def test_none_never_caches():
    site, resolver = plus_site(NONE)
    for i in range(50):
        site.call2(i, i)
    assert resolver.calls == 50 and site.hits == 0 and site.relinks == 0
    assert chain_length(site) == 0


operands = st.one_of(st.integers(-1000, 1000), st.integers(-1000, 1000).map(Long),
                     st.floats(-1e6, 1e6), st.text(max_size=3))
policies = st.sampled_from([MONO, NONE, POLY2, DispatchPolicy.parse("poly:4")])


@given(policies, st.lists(st.tuples(operands, operands), min_size=1, max_size=40))
def test_site_agrees_with_uncached_semantics(policy, pairs):
    site, _ = plus_site(policy, CheckedCallSite)
    for a, b in pairs:
        try:
            expected = apply_operator("+", a, b)
        except Exception as exc:
            with pytest.raises(type(exc)):
                site.call2(a, b)
        else:
            got = site.call2(a, b)
            assert type(got) is type(expected)
            assert got == expected or got != got
        assert chain_length(site) <= policy.depth
        assert site.hits + site.misses >= 1


def test_checked_site_detects_bad_guard():
    site, _ = plus_site(MONO, CheckedCallSite)
    site.call2(1, 2)
    site.chain.k0 = float  # corrupt the guard
    with pytest.raises(AssertionError):
        site.call2(1.5, 2)


def test_function_site_uses_constant_guard():
    calls = []

    def resolver(site, args):
        calls.append(list(args))
        return lambda a: sum(a)

    site = CallSite(3, "function", "add", 2, resolver, MONO)
    assert invoke_site(site, (1, 2)) == 3
    assert invoke_site(site, (1.5, 2)) == 3.5
    assert len(calls) == 1 and site.guards() == [()]


def test_stats_format_skips_unexecuted_sites():
    used, _ = plus_site(MONO)
    used.call2(1, 2)
    idle = CallSite(1, "operator", "minus", 2, CountingResolver(), MONO)
    assert format_site_stats([idle, used]) == (
        "site=0 kind=operator name=plus hits=0 misses=1 relinks=1 depth=1 mega=false\n")

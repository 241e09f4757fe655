"""Independent brute-force oracles used to pin expected values.

These deliberately avoid the production dynamic programmes and assignment
solver: overlaps come from explicit enumeration of subpaths/subsequences, and
collection distances from explicit enumeration of (monotone) matchings.
Only usable for tiny instances.
"""

import itertools


def brute_subpath_len(a, b):
    best = 0
    for i in range(len(a)):
        for j in range(i + 1, len(a) + 1):
            sub = tuple(a[i:j])
            for k in range(len(b) - len(sub) + 1):
                if tuple(b[k : k + len(sub)]) == sub:
                    best = max(best, len(sub))
    return best


def brute_subseq_len(a, b):
    subs_b = set()
    for r in range(len(b) + 1):
        for idx in itertools.combinations(range(len(b)), r):
            subs_b.add(tuple(b[i] for i in idx))
    best = 0
    for r in range(len(a) + 1):
        for idx in itertools.combinations(range(len(a)), r):
            if tuple(a[i] for i in idx) in subs_b:
                best = max(best, r)
    return best


def brute_path_distance(a, b, inner):
    delta = brute_subpath_len(a, b) if inner == "lsp" else brute_subseq_len(a, b)
    return len(a) + len(b) - 2 * delta


def brute_seq_distance(S, T, inner):
    """Minimum over all monotone matchings, enumerated outright."""
    best = None
    for k in range(min(len(S), len(T)) + 1):
        for si in itertools.combinations(range(len(S)), k):
            for ti in itertools.combinations(range(len(T)), k):
                cost = sum(brute_path_distance(S[i], T[j], inner) for i, j in zip(si, ti))
                cost += sum(len(S[i]) for i in range(len(S)) if i not in si)
                cost += sum(len(T[j]) for j in range(len(T)) if j not in ti)
                if best is None or cost < best:
                    best = cost
    return best


def brute_multiset_distance(E, F, inner):
    """Minimum over all (unconstrained) matchings, enumerated outright."""
    best = None
    for k in range(min(len(E), len(F)) + 1):
        for ei in itertools.combinations(range(len(E)), k):
            for fj in itertools.permutations(range(len(F)), k):
                cost = sum(brute_path_distance(E[i], F[j], inner) for i, j in zip(ei, fj))
                cost += sum(len(E[i]) for i in range(len(E)) if i not in ei)
                cost += sum(len(F[j]) for j in range(len(F)) if j not in fj)
                if best is None or cost < best:
                    best = cost
    return best


def random_path(rng, V, max_len):
    n = int(rng.integers(1, max_len + 1))
    return tuple(int(x) for x in rng.integers(0, V, size=n))


def random_obs(rng, V, max_len, max_paths):
    n = int(rng.integers(1, max_paths + 1))
    return tuple(random_path(rng, V, max_len) for _ in range(n))


def tv_distance(p, q):
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def empirical_dist(samples):
    out = {}
    for s in samples:
        out[s] = out.get(s, 0.0) + 1.0
    n = len(samples)
    return {k: v / n for k, v in out.items()}

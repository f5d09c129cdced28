"""Independent reference implementations used as oracles by the test suite.

Everything here is deliberately written as plain-python loops over lists,
sharing no code with the library internals it checks.
"""


def bits_of(pattern):
    if isinstance(pattern, str):
        return [int(ch) for ch in pattern]
    return [int(b) for b in pattern]


def ref_alignment_count(p, e, offset):
    """Complementary (differing) bit pairs when p[t] faces e[t - offset]."""
    p, e = bits_of(p), bits_of(e)
    count = 0
    for t in range(len(p)):
        u = t - offset
        if 0 <= u < len(e) and p[t] != e[u]:
            count += 1
    return count


def ref_alignment_score(count, s):
    return 0 if count < s else 1 + (count - s)


def ref_total_reaction(p, e, s, min_overlap=None, shifted=True):
    """Brute-force enumeration of every alignment's score."""
    length = len(bits_of(p))
    if min_overlap is None:
        min_overlap = s
    if shifted:
        offsets = range(-(length - min_overlap), (length - min_overlap) + 1)
    else:
        offsets = [0]
    return sum(ref_alignment_score(ref_alignment_count(p, e, k), s) for k in offsets)


def ref_longest_run(a, b):
    """Window scan over every start position for the longest agreeing run."""
    a, b = bits_of(a), bits_of(b)
    best = 0
    for start in range(len(a)):
        run = 0
        for t in range(start, len(a)):
            if a[t] == b[t]:
                run += 1
            else:
                break
        best = max(best, run)
    return best


def ref_window_match(a, b, r):
    """True iff some window of r consecutive positions agrees everywhere."""
    a, b = bits_of(a), bits_of(b)
    for start in range(len(a) - r + 1):
        if all(a[start + t] == b[start + t] for t in range(r)):
            return True
    return False


def all_bit_strings(length):
    return [format(v, f"0{length}b") for v in range(2**length)]

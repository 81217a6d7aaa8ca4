"""
Fourier-Motzkin elimination over exact rationals.

A system is a list of ``(coeffs, bound)`` pairs meaning
``sum(coeffs[v] * x[v]) <= bound``; ``coeffs`` maps variable names to
``Fraction`` (or int) coefficients. Elimination is exact, and duplicate
or trivially implied rows are pruned after each step to keep the
quadratic growth in check on the small systems used here.
"""

from fractions import Fraction

__all__ = ['eliminate', 'project', 'maximize']


def _normalize(coeffs, bound):
    coeffs = {v: Fraction(c) for v, c in coeffs.items() if c != 0}
    bound = Fraction(bound)
    if not coeffs:
        return None, bound
    scale = max(abs(c) for c in coeffs.values())
    return ({v: c / scale for v, c in coeffs.items()}, bound / scale)


def _prune(rows):
    best = {}
    for coeffs, bound in rows:
        key = tuple(sorted(coeffs.items()))
        if key not in best or bound < best[key][1]:
            best[key] = (coeffs, bound)
    return list(best.values())


def eliminate(rows, var):
    """
    Remove ``var`` from the system, returning an equivalent system over the
    remaining variables.

    Raises
    ------
    ValueError
        If the elimination exposes a contradiction ``0 <= b`` with ``b < 0``.
    """
    upper, lower, rest = [], [], []
    for coeffs, bound in rows:
        c = coeffs.get(var, 0)
        if c > 0:
            upper.append((coeffs, bound))
        elif c < 0:
            lower.append((coeffs, bound))
        else:
            rest.append((coeffs, bound))
    out = list(rest)
    for cu, bu in upper:
        au = Fraction(cu[var])
        for cl, bl in lower:
            al = -Fraction(cl[var])
            names = (set(cu) | set(cl)) - {var}
            combined = {v: al * cu.get(v, 0) + au * cl.get(v, 0)
                        for v in names}
            coeffs, bound = _normalize(combined, al * bu + au * bl)
            if coeffs is None:
                if bound < 0:
                    raise ValueError("system is infeasible")
                continue
            out.append((coeffs, bound))
    return _prune(out)


def project(rows, keep):
    """Eliminate every variable not in ``keep``."""
    rows = [_normalize(c, b) for c, b in rows]
    for coeffs, bound in rows:
        if coeffs is None and bound < 0:
            raise ValueError("system is infeasible")
    rows = _prune([r for r in rows if r[0] is not None])
    names = sorted({v for c, _ in rows for v in c} - set(keep))
    for v in names:
        rows = eliminate(rows, v)
    return rows


def maximize(rows, objective):
    """
    Maximum of a linear objective over the polyhedron, via projection onto
    an auxiliary variable. Returns ``None`` if unbounded above.
    """
    t = '__objective__'
    rows = list(rows)
    rows.append(({t: 1, **{v: -Fraction(c) for v, c in objective.items()}},
                 0))
    best = None
    for coeffs, bound in project(rows, [t]):
        c = coeffs.get(t, 0)
        if c > 0:
            value = bound / c
            best = value if best is None else min(best, value)
    return best

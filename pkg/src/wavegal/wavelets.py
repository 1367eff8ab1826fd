"""Biorthogonal wavelet systems on [0, 1].

A system consists of interior scaling functions and wavelets (primal and
dual) together with boundary-adapted families on the left and right ends
of the unit interval, plus the index offsets that say which interior
translates fit inside [0, 1] at each dyadic level.  Everything is a
spline, carried by PiecewisePolynomial.

The module ships one built-in system of approximation order 2 whose dual
functions are constructed at import time by solving small exact linear
systems (minimum-norm splines satisfying the biorthogonality
constraints), and a text format for supplying external systems, which
are accepted purely on passing the same verification battery.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .piecewise import Interval, PiecewisePolynomial, inner_product

__all__ = [
    "WaveletSystem",
    "VerificationReport",
    "SystemFormatError",
    "SystemVerificationError",
    "builtin_order2_system",
    "load_system",
    "save_system",
    "verify_biorthogonality",
    "verify_boundary_moments",
    "full_verification",
    "dual_antiderivative_ladder",
]

VERIFICATION_TOL = 1e-10


class SystemFormatError(ValueError):
    """Raised when a system definition file cannot be parsed."""


class SystemVerificationError(ValueError):
    """Raised when a wavelet system fails a verification check."""

    def __init__(self, check: str, residual: float):
        super().__init__(f"system verification failed: {check} (residual {residual:.3e})")
        self.check = check
        self.residual = residual


@dataclass(frozen=True)
class VerificationReport:
    """Named residuals from the system verification battery."""

    checks: dict  # name -> residual
    tol: float = VERIFICATION_TOL

    def passed(self, name: str) -> bool:
        return self.checks[name] <= self.tol

    @property
    def all_passed(self) -> bool:
        return all(r <= self.tol for r in self.checks.values())

    def worst(self) -> tuple[str, float]:
        name = max(self.checks, key=self.checks.get)
        return name, self.checks[name]

    def merge(self, other: "VerificationReport") -> "VerificationReport":
        merged = dict(self.checks)
        merged.update(other.checks)
        return VerificationReport(merged, self.tol)

    def __str__(self) -> str:
        lines = []
        for name, res in self.checks.items():
            lines.append(f"{'PASS' if res <= self.tol else 'FAIL'}  {name}: {res:.3e}")
        return "\n".join(lines)


@dataclass(frozen=True)
class WaveletSystem:
    """A biorthogonal wavelet system adapted to [0, 1]."""

    m: int
    r: int
    J0: int
    n_l_phi: int
    n_h_phi: int
    n_l_psi: int
    n_h_psi: int
    phi: tuple
    psi: tuple
    phi_dual: tuple
    psi_dual: tuple
    phi_left: tuple
    psi_left: tuple
    phi_right: tuple
    psi_right: tuple
    phi_left_dual: tuple
    psi_left_dual: tuple
    phi_right_dual: tuple
    psi_right_dual: tuple

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("approximation order m must be >= 2")
        if self.r < 1:
            raise ValueError("multiplicity r must be >= 1")
        for name in ("phi", "psi", "phi_dual", "psi_dual"):
            if len(getattr(self, name)) != self.r:
                raise ValueError(f"{name} must have {self.r} components")
        for side in ("left", "right"):
            for kind in ("phi", "psi"):
                p = getattr(self, f"{kind}_{side}")
                d = getattr(self, f"{kind}_{side}_dual")
                if len(p) != len(d):
                    raise ValueError(f"{kind}_{side} primal/dual counts differ")

    # family access by (kind, side) keys used throughout the basis builder
    def family(self, kind: str, side: str, dual: bool = False) -> tuple:
        name = {"scaling": "phi", "wavelet": "psi"}[kind]
        if side != "interior":
            name = f"{name}_{side}"
        if dual:
            name = f"{name}_dual"
        return getattr(self, name)

    def interior_range(self, kind: str, j: int) -> range:
        """Translates k of interior functions living inside [0,1] at level j."""
        if kind == "scaling":
            return range(self.n_l_phi, 2**j - self.n_h_phi + 1)
        return range(self.n_l_psi, 2**j - self.n_h_psi + 1)


# ---------------------------------------------------------------------------
# exact minimum-norm construction of spline duals
# ---------------------------------------------------------------------------


def _dof_basis(breaks, deg):
    """Unit splines spanning all piecewise polynomials of degree <= deg."""
    out = []
    n = len(breaks) - 1
    for i in range(n):
        for d in range(deg + 1):
            pieces = []
            for jj in range(n):
                c = [Fraction(0)] * (deg + 1)
                if i == jj:
                    c[d] = Fraction(1)
                pieces.append(tuple(c))
            out.append((PiecewisePolynomial(breaks, pieces), i, d))
    return out


def _gauss_solve(M, b):
    n = len(M)
    A = [row[:] + [b[i]] for i, row in enumerate(M)]
    for col in range(n):
        piv = next((rr for rr in range(col, n) if A[rr][col] != 0), None)
        if piv is None:
            raise ValueError("singular constraint system (dependent constraints)")
        A[col], A[piv] = A[piv], A[col]
        pv = A[col][col]
        A[col] = [v / pv for v in A[col]]
        for rr in range(n):
            if rr != col and A[rr][col] != 0:
                f = A[rr][col]
                A[rr] = [v - f * w for v, w in zip(A[rr], A[col])]
    return [A[i][n] for i in range(n)]


def _build_dual(breaks, deg, constraints):
    """Minimum-norm spline on `breaks` meeting exact inner-product constraints.

    `constraints` is a list of (target PiecewisePolynomial, value); the
    returned spline g satisfies <target, g> = value for every pair, with
    the smallest coefficient norm (normal equations solved in exact
    rational arithmetic).
    """
    basis = _dof_basis(breaks, deg)
    rows = [[inner_product(t, bf) for bf, _, _ in basis] for t, _ in constraints]
    rhs = [v for _, v in constraints]
    nc = len(rows)
    G = [
        [sum(rows[i][k] * rows[jj][k] for k in range(len(rows[0]))) for jj in range(nc)]
        for i in range(nc)
    ]
    lam = _gauss_solve(G, rhs)
    x = [sum(rows[i][k] * lam[i] for i in range(nc)) for k in range(len(rows[0]))]
    n = len(breaks) - 1
    pieces = [[Fraction(0)] * (deg + 1) for _ in range(n)]
    for coef, (_, i, d) in zip(x, basis):
        pieces[i][d] += coef
    return PiecewisePolynomial(breaks, [tuple(p) for p in pieces])


def _halfgrid(lo, hi):
    out = []
    x = Fraction(lo)
    while x <= Fraction(hi):
        out.append(x)
        x += Fraction(1, 2)
    return out


@lru_cache(maxsize=1)
def builtin_order2_system() -> WaveletSystem:
    """The built-in order-2 spline system (hat primal, hierarchical wavelet).

    Primal scaling function: the hat on [-1, 1].  Primal wavelet: the
    half-scale hat on [0, 1] (so each wavelet level exactly fills the gap
    between consecutive scaling levels).  The dual functions are
    piecewise-linear splines on half-integer grids determined by
    same-level biorthogonality; vanishing moments follow from
    orthogonality to the hat translates, which reproduce linears.
    """
    one, zero = Fraction(1), Fraction(0)
    phi = PiecewisePolynomial([-1, 0, 1], [(zero, one), (one, -one)])
    psi = PiecewisePolynomial([0, Fraction(1, 2), 1], [(zero, 2 * one), (one, -2 * one)])
    phi_left = phi.translate(1)  # hat on [0, 2]
    psi_left = psi

    def shifted(p, k):
        return p.translate(k)

    deg = 1
    cons = [(shifted(phi, k), zero) for k in (-1, 0, 1, 2)]
    cons += [(shifted(psi, k), one if k == 0 else zero) for k in (-1, 0, 1)]
    psi_dual = _build_dual(_halfgrid(-1, 2), deg, cons)

    cons = [(shifted(phi, k), one if k == 0 else zero) for k in (-2, -1, 0, 1, 2)]
    cons += [(shifted(psi, k), zero) for k in (-2, -1, 0, 1)]
    phi_dual = _build_dual(_halfgrid(-2, 2), deg, cons)

    cons = [
        (phi_left, zero),
        (shifted(phi, 2), zero),
        (psi_left, one),
        (shifted(psi, 1), zero),
    ]
    psi_left_dual = _build_dual(_halfgrid(0, 2), deg, cons)

    cons = [
        (phi_left, one),
        (shifted(phi, 2), zero),
        (psi_left, zero),
        (shifted(psi, 1), zero),
    ]
    phi_left_dual = _build_dual(_halfgrid(0, 2), deg, cons)

    sys = WaveletSystem(
        m=2,
        r=1,
        J0=2,
        n_l_phi=2,
        n_h_phi=2,
        n_l_psi=1,
        n_h_psi=2,
        phi=(phi,),
        psi=(psi,),
        phi_dual=(phi_dual,),
        psi_dual=(psi_dual,),
        phi_left=(phi_left,),
        psi_left=(psi_left,),
        phi_right=(phi_left.reflect(1),),
        psi_right=(psi_left.reflect(1),),
        phi_left_dual=(phi_left_dual,),
        psi_left_dual=(psi_left_dual,),
        phi_right_dual=(phi_left_dual.reflect(1),),
        psi_right_dual=(psi_left_dual.reflect(1),),
    )
    report = full_verification(sys)
    if not report.all_passed:
        name, res = report.worst()
        raise SystemVerificationError(name, float(res))
    return sys


# ---------------------------------------------------------------------------
# verification battery
# ---------------------------------------------------------------------------


def _overlap_shifts(p: PiecewisePolynomial, q: PiecewisePolynomial):
    """Integer shifts k with Supp(p) meeting Supp(q(. - k)), plus a margin."""
    import math

    lo = math.floor(float(p.support.lo - q.support.hi)) - 1
    hi = math.ceil(float(p.support.hi - q.support.lo)) + 1
    return range(lo, hi + 1)


def _level_sets(sys: WaveletSystem, j: int, dual: bool):
    """Flat lists of the level-j scaling and wavelet functions on [0,1]."""
    phi_set, psi_set = [], []
    for kind, out in (("scaling", phi_set), ("wavelet", psi_set)):
        for f in sys.family(kind, "left", dual):
            out.append(f.dyadic_transform(j, 0))
        for k in sys.interior_range(kind, j):
            for f in sys.family(kind, "interior", dual):
                out.append(f.dyadic_transform(j, k))
        for f in sys.family(kind, "right", dual):
            out.append(f.dyadic_transform(j, 2**j - 1))
    return phi_set, psi_set


def verify_biorthogonality(sys: WaveletSystem, tol: float = VERIFICATION_TOL) -> VerificationReport:
    """Check the delta relations between primal and dual families.

    Two layers: shift-biorthogonality of the interior functions on the
    line, and the full cross-Gram of the coarsest-level sets
    (scaling + wavelet, boundary functions included) on [0, 1], which
    must be the identity under the primal/dual bijection.
    """
    res_int = 0.0
    pairs = [
        (sys.phi, sys.phi_dual, True),
        (sys.psi, sys.psi_dual, True),
        (sys.phi, sys.psi_dual, False),
        (sys.psi, sys.phi_dual, False),
    ]
    for prims, duals, diag in pairs:
        for a, p in enumerate(prims):
            for b, q in enumerate(duals):
                for k in _overlap_shifts(p, q):
                    want = 1 if (diag and a == b and k == 0) else 0
                    v = inner_product(p, q.translate(k))
                    res_int = max(res_int, abs(float(v - want)))

    j = sys.J0
    prim_phi, prim_psi = _level_sets(sys, j, dual=False)
    dual_phi, dual_psi = _level_sets(sys, j, dual=True)
    prim = prim_phi + prim_psi
    dual = dual_phi + dual_psi
    res_j0 = 0.0
    for i, p in enumerate(prim):
        for jj, q in enumerate(dual):
            v = inner_product(p, q)
            want = 1 if i == jj else 0
            res_j0 = max(res_j0, abs(float(v - want)))
    return VerificationReport(
        {"biorthogonality-interior": res_int, "biorthogonality-level-J0": res_j0}, tol
    )


def verify_boundary_moments(sys: WaveletSystem, tol: float = VERIFICATION_TOL) -> VerificationReport:
    """Vanishing moments 1..m-1 of boundary dual wavelets (about 0 / 1).

    Moment 0 of the boundary dual wavelets is reported for information
    but is not required to vanish.
    """
    checks = {}
    res = 0.0
    for f in sys.psi_left_dual:
        for d in range(1, sys.m):
            res = max(res, abs(float(f.moment(d, 0))))
    for f in sys.psi_right_dual:
        for d in range(1, sys.m):
            res = max(res, abs(float(f.moment(d, 1))))
    checks["moments-boundary"] = res
    return VerificationReport(checks, tol)


def boundary_zeroth_moments(sys: WaveletSystem) -> dict:
    """Zeroth moments of the boundary dual wavelets (reported, not constrained)."""
    return {
        "left": [float(f.moment(0, 0)) for f in sys.psi_left_dual],
        "right": [float(f.moment(0, 1)) for f in sys.psi_right_dual],
    }


def _interior_moment_residual(sys: WaveletSystem) -> float:
    res = 0.0
    for f in sys.psi_dual:
        for d in range(sys.m):
            res = max(res, abs(float(f.moment(d, 0))))
    return res


def _continuity_residual(sys: WaveletSystem) -> float:
    """Primal functions must be continuous (H1) and vanish at support ends."""
    res = 0.0
    prims = (
        list(sys.phi)
        + list(sys.psi)
        + list(sys.phi_left)
        + list(sys.psi_left)
        + list(sys.phi_right)
        + list(sys.psi_right)
    )
    for f in prims:
        bps = f.breakpoints
        res = max(res, abs(float(f._local_coeffs(bps[0])[0])))
        for i in range(1, len(bps) - 1):
            left = f(float(bps[i]))  # left limit by convention
            right = float(f._local_coeffs(bps[i])[0])
            res = max(res, abs(left - right))
        # value at the right support end (left limit)
        res = max(res, abs(f(float(bps[-1]))))
    return res


def _disjointness_residual(sys: WaveletSystem) -> float:
    """Left/right boundary supports at level J0 must not overlap, and all
    level-J0 functions (primal and dual) must live inside [0, 1]."""
    j = sys.J0
    worst = 0.0
    lefts, rights = [], []
    for dual in (False, True):
        for kind in ("scaling", "wavelet"):
            for f in sys.family(kind, "left", dual):
                lefts.append(f.dyadic_transform(j, 0).support)
            for f in sys.family(kind, "right", dual):
                rights.append(f.dyadic_transform(j, 2**j - 1).support)
        phi_set, psi_set = _level_sets(sys, j, dual)
        for f in phi_set + psi_set:
            s = f.support
            worst = max(worst, float(max(0 - s.lo, s.hi - 1, 0)))
    gap = min(float(rs.lo) for rs in rights) - max(float(ls.hi) for ls in lefts)
    worst = max(worst, max(0.0, -gap))
    return worst


def full_verification(sys: WaveletSystem, tol: float = VERIFICATION_TOL) -> VerificationReport:
    """Run the complete battery required for accepting a system."""
    report = verify_biorthogonality(sys, tol)
    report = report.merge(verify_boundary_moments(sys, tol))
    extra = {
        "moments-interior": _interior_moment_residual(sys),
        "h1-membership": _continuity_residual(sys),
        "support-disjointness-J0": _disjointness_residual(sys),
    }
    # ladder checks raise on failure; record as residual instead
    try:
        dual_antiderivative_ladder(sys, _verified=True)
        extra["dual-antiderivative-ladder"] = 0.0
    except SystemVerificationError as e:
        extra["dual-antiderivative-ladder"] = e.residual
    return report.merge(VerificationReport(extra, tol))


# ---------------------------------------------------------------------------
# dual antiderivative ladder
# ---------------------------------------------------------------------------


def dual_antiderivative_ladder(sys: WaveletSystem, _verified: bool = False):
    """Iterated antiderivatives of the dual wavelets, with property checks.

    Interior and right-boundary duals integrate from the left; left-
    boundary duals use minus the integral from the right.  Checks: the
    interior ladder stays supported inside the original support for all
    m steps, and boundary ladders vanish at their endpoint (0 on the
    left, 1 on the right) from the second step on.  The first boundary
    step may be nonzero at the endpoint; that is allowed.

    Returns a dict with keys 'interior', 'left', 'right'; each value is
    a list (one entry per dual wavelet) of the ladder [step1, ..., stepm].
    """
    m = sys.m
    out = {"interior": [], "left": [], "right": []}

    for f in sys.psi_dual:
        ladder = []
        cur = f
        for n in range(1, m + 1):
            cur, compact = cur.antiderivative_from_left()
            if not compact:
                raise SystemVerificationError(
                    f"interior dual ladder support containment (step {n})", 1.0
                )
            ladder.append(cur)
        out["interior"].append(ladder)

    for f in sys.psi_left_dual:
        ladder = []
        cur = f
        for n in range(1, m + 1):
            cur, _ = cur.antiderivative_to_right()
            v = float(cur._local_coeffs(cur.breakpoints[0])[0])
            if n >= 2 and abs(v) > 1e-12:
                raise SystemVerificationError(
                    f"left boundary dual ladder endpoint value (step {n})", abs(v)
                )
            ladder.append(cur)
        out["left"].append(ladder)

    for f in sys.psi_right_dual:
        ladder = []
        cur = f
        for n in range(1, m + 1):
            cur, _ = cur.antiderivative_from_left()
            v = cur(float(cur.breakpoints[-1]))  # left limit at the right end
            if n >= 2 and abs(v) > 1e-12:
                raise SystemVerificationError(
                    f"right boundary dual ladder endpoint value (step {n})", abs(v)
                )
            ladder.append(cur)
        out["right"].append(ladder)
    return out


# ---------------------------------------------------------------------------
# text format (system definition files)
# ---------------------------------------------------------------------------

_FAMILY_NAMES = (
    "phi",
    "psi",
    "phi_dual",
    "psi_dual",
    "phi_left",
    "psi_left",
    "phi_right",
    "psi_right",
    "phi_left_dual",
    "psi_left_dual",
    "phi_right_dual",
    "psi_right_dual",
)

_BREAK_RE = re.compile(r"^(-?\d+)(?:/2\^(\d+))?$")
_FUNC_RE = re.compile(r"^FUNC\s+(\w+)\[(\d+)\]$")


def _format_break(b: Fraction) -> str:
    e = b.denominator.bit_length() - 1
    return f"{b.numerator}/2^{e}" if e else str(b.numerator)


def save_system(sys: WaveletSystem, path) -> None:
    """Write a system definition file (see the README for the grammar)."""
    lines = [
        "# wavelet system definition",
        f"m {sys.m}",
        f"r {sys.r}",
        f"J0 {sys.J0}",
        f"offsets {sys.n_l_phi} {sys.n_h_phi} {sys.n_l_psi} {sys.n_h_psi}",
    ]
    for name in _FAMILY_NAMES:
        for i, f in enumerate(getattr(sys, name)):
            lines.append(f"FUNC {name}[{i}]")
            lines.append("BREAKS " + " ".join(_format_break(b) for b in f.breakpoints))
            for p in f.pieces:
                lines.append("PIECE " + " ".join(repr(float(c)) for c in p))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_system(path, tol: float = VERIFICATION_TOL) -> WaveletSystem:
    """Parse a system definition file and accept it iff verification passes."""
    with open(path) as fh:
        raw = fh.read()

    header: dict = {}
    families: dict = {name: [] for name in _FAMILY_NAMES}
    cur_name = None
    cur_breaks = None
    cur_pieces: list = []

    def flush(lineno):
        nonlocal cur_name, cur_breaks, cur_pieces
        if cur_name is None:
            return
        if cur_breaks is None:
            raise SystemFormatError(f"line {lineno}: FUNC block without BREAKS")
        try:
            pp = PiecewisePolynomial(cur_breaks, cur_pieces)
        except ValueError as e:
            raise SystemFormatError(f"line {lineno}: {e}") from e
        families[cur_name].append(pp)
        cur_name, cur_breaks, cur_pieces = None, None, []

    for lineno, line in enumerate(raw.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("FUNC"):
            flush(lineno)
            mobj = _FUNC_RE.match(line)
            if not mobj:
                raise SystemFormatError(f"line {lineno}: malformed FUNC line: {line!r}")
            name, idx = mobj.group(1), int(mobj.group(2))
            if name not in _FAMILY_NAMES:
                raise SystemFormatError(f"line {lineno}: unknown family {name!r}")
            if idx != len(families[name]):
                raise SystemFormatError(
                    f"line {lineno}: {name}[{idx}] out of order (expected index {len(families[name])})"
                )
            cur_name = name
        elif line.startswith("BREAKS"):
            if cur_name is None:
                raise SystemFormatError(f"line {lineno}: BREAKS outside a FUNC block")
            toks = line.split()[1:]
            vals = []
            for t in toks:
                mobj = _BREAK_RE.match(t)
                if not mobj:
                    raise SystemFormatError(f"line {lineno}: bad breakpoint token {t!r}")
                num = int(mobj.group(1))
                e = int(mobj.group(2) or 0)
                vals.append(Fraction(num, 2**e))
            if any(a >= b for a, b in zip(vals, vals[1:])):
                raise SystemFormatError(f"line {lineno}: breakpoints not increasing")
            cur_breaks = vals
        elif line.startswith("PIECE"):
            if cur_breaks is None:
                raise SystemFormatError(f"line {lineno}: PIECE before BREAKS")
            try:
                cur_pieces.append(tuple(float(t) for t in line.split()[1:]))
            except ValueError as e:
                raise SystemFormatError(f"line {lineno}: bad coefficient: {e}") from e
        else:
            key, *rest = line.split()
            if key in ("m", "r", "J0"):
                header[key] = int(rest[0])
            elif key == "offsets":
                if len(rest) != 4:
                    raise SystemFormatError(f"line {lineno}: offsets needs 4 integers")
                header["offsets"] = tuple(int(v) for v in rest)
            else:
                raise SystemFormatError(f"line {lineno}: unrecognized line: {line!r}")
    flush("<eof>")

    for key in ("m", "r", "J0", "offsets"):
        if key not in header:
            raise SystemFormatError(f"missing header field {key!r}")
    missing = [n for n in _FAMILY_NAMES if not families[n]]
    if missing:
        raise SystemFormatError(f"missing function families: {', '.join(missing)}")

    nl_phi, nh_phi, nl_psi, nh_psi = header["offsets"]
    try:
        sys = WaveletSystem(
            m=header["m"],
            r=header["r"],
            J0=header["J0"],
            n_l_phi=nl_phi,
            n_h_phi=nh_phi,
            n_l_psi=nl_psi,
            n_h_psi=nh_psi,
            **{name: tuple(families[name]) for name in _FAMILY_NAMES},
        )
    except ValueError as e:
        raise SystemFormatError(str(e)) from e

    report = full_verification(sys, tol)
    if not report.all_passed:
        name, res = report.worst()
        raise SystemVerificationError(name, float(res))
    return sys

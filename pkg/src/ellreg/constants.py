"""Closed-form evaluation of the explicit universal constants behind interior
C^{2,alpha} regularity of almost-linear uniformly elliptic equations, plus a
machine check of the inequality chain the construction needs.

The chain, for dimension n, ellipticity lam <= Lam, and exponents
0 < alpha < alpha_bar < 1:

    r0          = (3 / (250 n^3))^(1/(1 - alpha_bar))
    eps0_tilde  = min( lam * (2 / (25 n^2)) * r0^alpha_bar,
                       (1/2)^(1 + 6/alpha0) * (lam / K2) * K1^(-3/alpha0)
                           * r0^((2 + alpha_bar)(1 + 3/alpha0)) )
    eps0        = eps0_tilde(n, lam/Lam, Lam/lam, alpha_bar) / Lam
    C0          = 1 + n + (25/4) n^2 + (1/(2 lam)) eps0_tilde (25/4) n^2
    C0'         = C0 (1 + 3/(1 - r0^ab)) / r0^(1+ab)
    C1~         = C0' * 2^ab * (2 + 2^(2+ab))^2
    C1          = [C0 at rescaled ellipticity] * (1 + 3/(1 - r0^ab))
                    * 2^ab / r0^(1+ab) * (2 + 2^(2+ab))^2 * Lam^(2+ab)
    gamma       = ((1/4) r0^(2+ab) / K1)^(1/alpha0)
    mu          = min( (2 C1)^(-1/(ab - alpha)), (3/7)^(1/alpha) )
    delta       = C1 mu^(2+ab) / (omega_n^(1/n) C3)
    C4          = 1 + 3 C1 / (1 - mu^alpha)

C0 is printed in two inconsistent forms in the source derivation; the
"proof" form above is canonical here and the "statement" form
1 + n + 4 n^2 + (1/lam) eps0_tilde (25/8) n^(5/2) is reported alongside.

K1, alpha0 (interior Hoelder estimate), C_prime (harmonic boundary estimate),
K2 (mollifier derivative mass) and C3 (inhomogeneous approximation) come from
cited literature and have no closed form; they are configuration inputs with
illustrative defaults, and every report records the values used.

Everything is evaluated in binary floating point with 50 significant digits
(mpmath), because the second eps0_tilde branch underflows IEEE doubles
already at the default alpha0 = 0.1 (it is of order 1e-457 for n = 2,
alpha_bar = 1/2).  The chosen quantities eps0_tilde, mu, and delta are placed
a relative 1e-40 inside their feasible regions so that every audited
inequality holds strictly under any later rounding; the shave is invisible at
all documented tolerances.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from mpmath import mp

__all__ = [
    "ChainCheck",
    "ConstantsReport",
    "EllipticityBounds",
    "ExternalConstants",
    "HolderPair",
    "build_report",
    "c0",
    "c1_chain",
    "eps0",
    "eps0_tilde",
    "gamma_moll",
    "iteration_params",
    "omega_n",
    "pointwise_factor",
    "r0",
    "report_to_json",
    "validate_constraint_chain",
]

_DPS = 50
# keeps chosen constants strictly inside their feasible region (see module docstring)
_INSIDE = None


def _shave():
    global _INSIDE
    if _INSIDE is None:
        with mp.workdps(_DPS):
            _INSIDE = 1 - mp.mpf(10) ** -40
    return _INSIDE


@dataclass(frozen=True)
class EllipticityBounds:
    lam: float
    Lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if not self.lam <= self.Lam:
            raise ValueError("lambda must not exceed Lambda")


@dataclass(frozen=True)
class HolderPair:
    alpha_bar: float
    alpha: float | None = None

    def __post_init__(self):
        if not 0 < self.alpha_bar < 1:
            raise ValueError("alpha_bar must lie in (0,1)")
        if self.alpha is not None:
            if not 0 < self.alpha < 1:
                raise ValueError("alpha must lie in (0,1)")
            if not self.alpha < self.alpha_bar:
                raise ValueError("alpha must be smaller than alpha_bar")


@dataclass(frozen=True)
class ExternalConstants:
    """Literature constants treated as configuration inputs (see module docstring)."""

    K1: float = 1.0
    alpha0: float = 0.1
    C_prime: float = 1.0
    K2: float = 1.0
    C3: float = 1.0

    def __post_init__(self):
        for name in ("K1", "C_prime", "K2", "C3"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.alpha0 <= 1:
            raise ValueError("alpha0 must lie in (0,1]")


@dataclass(frozen=True)
class ChainCheck:
    name: str
    satisfied: bool
    slack: object  # mpf, RHS - LHS


@dataclass
class ConstantsReport:
    """Every universal constant of the chain (mpmath values) for given inputs."""

    n: int
    bounds: EllipticityBounds
    pair: HolderPair
    ext: ExternalConstants
    c0_variant: str
    r0: object
    eps0_tilde: object
    eps0: object
    C0: object
    C0_proof: object
    C0_statement: object
    C0_prime: object
    C1_tilde: object
    C1: object
    gamma: object
    mu: object
    delta: object
    C4: object
    omega_n: object
    chain_checks: list = field(default_factory=list)

    def all_checks_pass(self) -> bool:
        return all(c.satisfied for c in self.chain_checks)


def _validate_n(n) -> int:
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    return int(n)


def _validate_alpha_bar(alpha_bar):
    if not 0 < alpha_bar < 1:
        raise ValueError("alpha_bar must lie in (0,1)")
    return alpha_bar


def r0(n: int, alpha_bar: float):
    """(3/(250 n^3))^(1/(1-alpha_bar)); always below 1/5."""
    n = _validate_n(n)
    _validate_alpha_bar(alpha_bar)
    with mp.workdps(_DPS):
        ab = mp.mpf(alpha_bar)
        return (mp.mpf(3) / (250 * n**3)) ** (1 / (1 - ab))


def omega_n(n: int):
    """Volume of the unit ball in n dimensions."""
    n = _validate_n(n)
    with mp.workdps(_DPS):
        return mp.pi ** (mp.mpf(n) / 2) / mp.gamma(mp.mpf(n) / 2 + 1)


def pointwise_factor(alpha: float):
    """(2 + 2^(2+alpha))^2, the pointwise-to-uniform Hoelder upgrade factor."""
    with mp.workdps(_DPS):
        a = mp.mpf(alpha)
        return (2 + 2 ** (2 + a)) ** 2


def _eps0_tilde_branches(n, lam, alpha_bar, ext):
    with mp.workdps(_DPS):
        lam = mp.mpf(lam)
        ab = mp.mpf(alpha_bar)
        a0 = mp.mpf(ext.alpha0)
        r = r0(n, alpha_bar)
        branch1 = lam * 2 / (25 * n**2) * r**ab
        branch2 = (
            mp.mpf(2) ** -(1 + 6 / a0)
            * (lam / mp.mpf(ext.K2))
            * mp.mpf(ext.K1) ** (-3 / a0)
            * r ** ((2 + ab) * (1 + 3 / a0))
        )
        return branch1, branch2


def eps0_tilde(n: int, bounds: EllipticityBounds, alpha_bar: float, ext: ExternalConstants):
    """Smaller of the two admissible closeness caps, shaved strictly inside."""
    n = _validate_n(n)
    _validate_alpha_bar(alpha_bar)
    with mp.workdps(_DPS):
        b1, b2 = _eps0_tilde_branches(n, bounds.lam, alpha_bar, ext)
        return min(b1, b2) * _shave()


def eps0(n: int, bounds: EllipticityBounds, alpha_bar: float, ext: ExternalConstants):
    """Closeness threshold at general ellipticity: the rescaled cap divided by Lam."""
    rescaled = EllipticityBounds(bounds.lam / bounds.Lam, bounds.Lam / bounds.lam)
    with mp.workdps(_DPS):
        return eps0_tilde(n, rescaled, alpha_bar, ext) / mp.mpf(bounds.Lam)


def c0(n: int, lam: float, eps0_tilde_val, variant: str = "proof"):
    """Sup bound ||P|| <= C0 ||u|| for the single-step polynomial.

    variant "proof":      1 + n + (25/4) n^2 + (1/(2 lam)) eps (25/4) n^2
    variant "statement":  1 + n + 4 n^2 + (1/lam) eps (25/8) n^(5/2)
    """
    n = _validate_n(n)
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if variant not in ("proof", "statement"):
        raise ValueError(f"unknown C0 variant {variant!r}")
    with mp.workdps(_DPS):
        lam = mp.mpf(lam)
        eps = mp.mpf(eps0_tilde_val)
        if eps < 0:
            raise ValueError("eps0_tilde must be nonnegative")
        if variant == "proof":
            return 1 + n + mp.mpf(25) / 4 * n**2 + eps / (2 * lam) * mp.mpf(25) / 4 * n**2
        return 1 + n + 4 * n**2 + eps / lam * mp.mpf(25) / 8 * mp.mpf(n) ** mp.mpf("2.5")


def c1_chain(n: int, bounds: EllipticityBounds, alpha_bar: float, ext: ExternalConstants, c0_variant: str = "proof"):
    """(C0', C1~, C1): the accumulated-iteration constants.

    C0' and C1~ are the near-Laplacian constants at the given lam; C1 is the
    general-ellipticity constant, whose leading factor is C0 (configured
    variant) evaluated at the rescaled ellipticity lam/Lam, times
    Lam^(2+alpha_bar).
    """
    n = _validate_n(n)
    _validate_alpha_bar(alpha_bar)
    with mp.workdps(_DPS):
        ab = mp.mpf(alpha_bar)
        r = r0(n, alpha_bar)
        tail = (1 + 3 / (1 - r**ab)) / r ** (1 + ab)
        factor = pointwise_factor(alpha_bar)
        eps_t = eps0_tilde(n, bounds, alpha_bar, ext)
        C0_val = c0(n, bounds.lam, eps_t, c0_variant)
        C0_prime = C0_val * tail
        C1_tilde = C0_prime * 2**ab * factor
        rescaled = EllipticityBounds(bounds.lam / bounds.Lam, bounds.Lam / bounds.lam)
        eps_t_resc = eps0_tilde(n, rescaled, alpha_bar, ext)
        C0_resc = c0(n, rescaled.lam, eps_t_resc, c0_variant)
        C1 = C0_resc * tail * 2**ab * factor * mp.mpf(bounds.Lam) ** (2 + ab)
        return C0_prime, C1_tilde, C1


def gamma_moll(r0_val, alpha_bar: float, K1: float, alpha0: float):
    """Mollification radius: the root of K1 gamma^alpha0 = (1/4) r0^(2+alpha_bar)."""
    if not (K1 > 0 and 0 < alpha0 <= 1):
        raise ValueError("need K1 > 0 and alpha0 in (0,1]")
    with mp.workdps(_DPS):
        r = mp.mpf(r0_val)
        if not r > 0:
            raise ValueError("r0 must be positive")
        ab = mp.mpf(alpha_bar)
        return (r ** (2 + ab) / 4 / mp.mpf(K1)) ** (1 / mp.mpf(alpha0))


def iteration_params(C1_val, alpha: float, alpha_bar: float, n: int, C3: float):
    """(mu, delta, C4) for the inhomogeneous iteration.

    mu is the largest ratio satisfying both 2 C1 mu^ab <= mu^a and mu^a <= 3/7;
    delta makes the source-smallness constraint an equality.  Both are shaved a
    relative 1e-40 inward so the audited inequalities hold strictly.
    """
    n = _validate_n(n)
    if not 0 < alpha < alpha_bar < 1:
        raise ValueError("need 0 < alpha < alpha_bar < 1")
    if not C3 > 0:
        raise ValueError("C3 must be positive")
    with mp.workdps(_DPS):
        C1 = mp.mpf(C1_val)
        if not C1 > 0:
            raise ValueError("C1 must be positive")
        a = mp.mpf(alpha)
        ab = mp.mpf(alpha_bar)
        mu = min((2 * C1) ** (-1 / (ab - a)), (mp.mpf(3) / 7) ** (1 / a)) * _shave()
        delta = C1 * mu ** (2 + ab) / (omega_n(n) ** (mp.mpf(1) / n) * mp.mpf(C3)) * _shave()
        C4 = 1 + 3 * C1 / (1 - mu**a)
        return mu, delta, C4


def validate_constraint_chain(report: "ConstantsReport", ext: ExternalConstants,
                              bounds: EllipticityBounds, pair: HolderPair) -> list:
    """Evaluate each named inequality; slack = RHS - LHS, satisfied literal."""
    checks = []
    with mp.workdps(_DPS):
        n = report.n
        lam = mp.mpf(bounds.lam)
        ab = mp.mpf(pair.alpha_bar)
        r = report.r0
        eps_t = report.eps0_tilde
        gamma = report.gamma
        K1 = mp.mpf(ext.K1)
        K2 = mp.mpf(ext.K2)
        a0 = mp.mpf(ext.alpha0)

        def add(name, lhs, rhs):
            checks.append(ChainCheck(name, bool(lhs <= rhs), rhs - lhs))

        add("closeness_cap", eps_t, lam * 2 / (25 * n**2) * r**ab)
        add("replacement_budget",
            K1 * gamma**a0 + eps_t / (2 * lam) * K2 / gamma**3,
            r ** (2 + ab) / 2)
        if pair.alpha is not None:
            a = mp.mpf(pair.alpha)
            mu, delta, C1 = report.mu, report.delta, report.C1
            add("ratio_decay", 2 * C1 * mu**ab, mu**a)
            add("ratio_cap", mu**a, mp.mpf(3) / 7)
            add("source_smallness",
                report.omega_n ** (mp.mpf(1) / n) * mp.mpf(ext.C3) * delta,
                C1 * mu ** (2 + ab))
    return checks


def build_report(n: int, bounds: EllipticityBounds, pair: HolderPair,
                 ext: ExternalConstants | None = None, c0_variant: str = "proof") -> ConstantsReport:
    """Assemble the full constants report and run the inequality audit."""
    ext = ext or ExternalConstants()
    n = _validate_n(n)
    with mp.workdps(_DPS):
        r = r0(n, pair.alpha_bar)
        eps_t = eps0_tilde(n, bounds, pair.alpha_bar, ext)
        eps_0 = eps0(n, bounds, pair.alpha_bar, ext)
        C0_proof = c0(n, bounds.lam, eps_t, "proof")
        C0_statement = c0(n, bounds.lam, eps_t, "statement")
        C0 = C0_proof if c0_variant == "proof" else C0_statement
        C0_prime, C1_tilde, C1 = c1_chain(n, bounds, pair.alpha_bar, ext, c0_variant)
        gamma = gamma_moll(r, pair.alpha_bar, ext.K1, ext.alpha0)
        if not gamma < mp.mpf(1) / 5:
            raise ValueError("gamma must stay below 1/5; K1/alpha0 inputs out of range")
        if pair.alpha is not None:
            mu, delta, C4 = iteration_params(C1, pair.alpha, pair.alpha_bar, n, ext.C3)
        else:
            mu = delta = C4 = None
        report = ConstantsReport(
            n=n, bounds=bounds, pair=pair, ext=ext, c0_variant=c0_variant,
            r0=r, eps0_tilde=eps_t, eps0=eps_0,
            C0=C0, C0_proof=C0_proof, C0_statement=C0_statement,
            C0_prime=C0_prime, C1_tilde=C1_tilde, C1=C1,
            gamma=gamma, mu=mu, delta=delta, C4=C4,
            omega_n=omega_n(n),
        )
        for name, value in (("r0", r), ("eps0_tilde", eps_t), ("eps0", eps_0),
                            ("C0", C0), ("C0_prime", C0_prime), ("C1_tilde", C1_tilde),
                            ("C1", C1), ("gamma", gamma)):
            if not value > 0:
                raise ValueError(f"{name} must be strictly positive")
        assert r < mp.mpf(1) / 5
        report.chain_checks = validate_constraint_chain(report, ext, bounds, pair)
    return report


def _jnum(x) -> str:
    """Full-precision JSON number token for an mpf/float value."""
    if x is None:
        return "null"
    if isinstance(x, (int, float)):
        return repr(float(x))
    with mp.workdps(_DPS):
        s = mp.nstr(x, 17)
    return s


def report_to_json(report: ConstantsReport, indent: int = 2) -> str:
    """Deterministic JSON rendering; numbers carry full precision even beyond
    the IEEE-double exponent range, so consumers should parse with a
    big-float-aware reader when extreme inputs are in play."""
    pad = " " * indent
    lines = ["{"]

    def put(key, token, last=False):
        lines.append(f'{pad}"{key}": {token}' + ("" if last else ","))

    put("n", str(report.n))
    put("lambda", _jnum(report.bounds.lam))
    put("Lambda", _jnum(report.bounds.Lam))
    put("alpha_bar", _jnum(report.pair.alpha_bar))
    put("alpha", _jnum(report.pair.alpha))
    for name in ("K1", "alpha0", "C_prime", "K2", "C3"):
        put(name, _jnum(getattr(report.ext, name)))
    put("c0_variant", json.dumps(report.c0_variant))
    for name in ("r0", "eps0_tilde", "eps0", "C0", "C0_proof", "C0_statement",
                 "C0_prime", "C1_tilde", "C1", "gamma", "mu", "delta", "C4", "omega_n"):
        put(name, _jnum(getattr(report, name)))
    rows = []
    for c in report.chain_checks:
        rows.append(
            f'{pad}{pad}{{"name": {json.dumps(c.name)}, '
            f'"satisfied": {"true" if c.satisfied else "false"}, '
            f'"slack": {_jnum(c.slack)}}}'
        )
    lines.append(f'{pad}"chain_checks": [')
    lines.append(",\n".join(rows))
    lines.append(f"{pad}]")
    lines.append("}")
    return "\n".join(lines) + "\n"

"""Symbolic construction of the glued disk metric built from star weights.

The surface is a disk assembled from rotationally symmetric patches:

* one *boundary tube* (waist circumference ``theta*pi*eps/2``) whose thin
  waist circle is the Dirichlet boundary of the disk,
* for every spoke a *doubled tube* (two mirror copies of waist
  ``theta_i*pi*eps`` glued at the waist) joining the hub to a cap,
* *caps*: flat unit-circumference cylinders closed by a fixed hemispherical
  cap, with the cylinder height tuned so the cap area plus one tube copy
  equals ``mu_i``,
* a *hub*: a flat conical frustum (outer circumference 1, inner
  circumference N-1) with N-1 unit-circumference flat port cylinders glued
  along the partitioned inner circle; cone points at port junctions are
  accepted.  For N = 1 the hub degenerates to a cap.

The blueprint stores the unscaled metric; every quantity of the
``eps``-scaled final metric (areas scale by ``eps``, eigenvalues by
``1/eps``) is computed on demand.  Optionally a flat rectangle is recorded
for attachment along a short interval of the Dirichlet waist circle, which
adds area while perturbing low eigenvalues arbitrarily little.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.integrate
import scipy.linalg

from .errors import InfeasibleAreaError, InfeasibleEpsilonError, ValidationError
from .graph import StarWeights

__all__ = [
    "CAP_RADIUS",
    "CAP_AREA",
    "TubeSpec",
    "CapSpec",
    "HubSpec",
    "RectanglePatch",
    "SurfaceBlueprint",
    "gudermannian",
    "tube_geometry",
    "tube_circumference",
    "tube_harmonic_profile",
    "harmonic_tube_energy",
    "blueprint_from_weights",
    "model_matrices",
    "model_spectrum",
    "attach_rectangle",
]

#: radius of the hemispherical cap closing each cap cylinder; its boundary
#: circle has circumference exactly 1
CAP_RADIUS = 1.0 / (2.0 * math.pi)

#: area of that hemisphere, 2*pi*r^2
CAP_AREA = 1.0 / (2.0 * math.pi)

#: minimal cylinder/frustum material required for a meshable patch
_AREA_FLOOR = 0.05


def gudermannian(x):
    """gd(x) = integral of sech from 0 to x = 2 atan(tanh(x/2))."""
    return 2.0 * np.arctan(np.tanh(np.asarray(x, dtype=float) / 2.0))


def tube_geometry(l: float) -> tuple[float, float]:
    """Chart length and area of a tube with waist circumference ``l``.

    The tube carries the metric dx^2 + (l cosh x)^2 ds^2 on
    [0, L] x R/Z with L = arccosh(1/l), so its circumference grows from
    ``l`` at the waist to exactly 1 at the wide end and its area is
    l * sinh L = sqrt(1 - l^2).
    """
    if not l > 0.0:
        raise ValidationError(f"waist circumference must be positive, got {l}")
    if l >= 1.0:
        raise InfeasibleEpsilonError(
            f"tube waist circumference {l:.6g} >= 1: the tube degenerates"
        )
    L = math.acosh(1.0 / l)
    return L, math.sqrt(1.0 - l * l)


def tube_circumference(l: float, x) -> np.ndarray:
    """Circumference of the tube cross-section at chart coordinate x."""
    return l * np.cosh(np.asarray(x, dtype=float))


def harmonic_tube_energy(l: float, A: float, B: float, copies: int) -> float:
    """Dirichlet energy of the rotationally symmetric harmonic function.

    End values are ``A`` and ``B``; for ``copies == 2`` the tube is two
    mirror copies in series (conductance halves).  Closed form:

        energy = (B - A)^2 * l / (copies * gd(L)),   L = arccosh(1/l)

    which tends to (2/pi) * (B - A)^2 * l / copies as l -> 0.
    """
    if copies not in (1, 2):
        raise ValidationError(f"copies must be 1 or 2, got {copies}")
    L, _ = tube_geometry(l)
    return (B - A) ** 2 * l / (copies * float(gudermannian(L)))


def tube_harmonic_profile(l: float, copies: int, hub_value: float, far_value: float):
    """The harmonic profile u(x) on a tube chart as a vectorized callable.

    For ``copies == 2`` the chart is [-L, L] with the hub side at x = -L
    and the far (cap) side at x = +L.  For ``copies == 1`` (boundary tube)
    the chart is [0, L] with the waist (far) side at x = 0 and the hub
    side at x = L.
    """
    L, _ = tube_geometry(l)
    gdL = float(gudermannian(L))

    if copies == 2:
        def u(x):
            t = (gudermannian(x) + gdL) / (2.0 * gdL)  # 0 at -L, 1 at +L
            return hub_value + (far_value - hub_value) * t
    else:
        def u(x):
            t = gudermannian(x) / gdL  # 0 at waist, 1 at hub end
            return far_value + (hub_value - far_value) * t

    return u


@dataclass(frozen=True)
class TubeSpec:
    """A (possibly doubled) tube patch of the glued surface."""

    waist: float
    chart_length: float
    copies: int

    @property
    def area(self) -> float:
        """Total area over all copies."""
        return self.copies * math.sqrt(1.0 - self.waist**2)


@dataclass(frozen=True)
class CapSpec:
    """Flat unit-circumference cylinder closed by the fixed hemisphere."""

    target_area: float
    cylinder_height: float

    def __post_init__(self):
        realized = self.cylinder_height + CAP_AREA
        if abs(realized - self.target_area) > 1e-12 * max(1.0, self.target_area):
            raise ValidationError("cap realization does not meet its target area")


@dataclass(frozen=True)
class HubSpec:
    """Hub patch: flat frustum plus equal-height unit ports.

    For ``n_ports == 1`` the hub is a disk and is realized like a cap
    (``cylinder_height`` + hemisphere); the frustum and ports are absent.
    """

    target_area: float
    n_ports: int
    frustum_height: float = 0.0
    port_height: float = 0.0
    cylinder_height: float = 0.0

    def __post_init__(self):
        n = self.n_ports
        if n == 1:
            realized = self.cylinder_height + CAP_AREA
        else:
            realized = self.frustum_height * n / 2.0 + (n - 1) * self.port_height
        if abs(realized - self.target_area) > 1e-12 * max(1.0, self.target_area):
            raise ValidationError("hub realization does not meet its target area")


@dataclass(frozen=True)
class RectanglePatch:
    """Flat rectangle attached along a boundary interval of length c."""

    a: float
    b: float
    c: float
    s_center: float = 0.5  # chart position of the interval on the waist circle

    def __post_init__(self):
        if min(self.a, self.b, self.c) <= 0.0:
            raise ValidationError("rectangle sides and attachment length must be positive")
        if self.c > self.a * (1.0 + 1e-12):
            raise ValidationError("attachment interval cannot exceed the rectangle side")

    @property
    def area(self) -> float:
        return self.a * self.b

    @property
    def dirichlet_gap(self) -> float:
        """pi^2 (1/a^2 + 1/b^2), the first Dirichlet eigenvalue of R."""
        return math.pi**2 * (1.0 / self.a**2 + 1.0 / self.b**2)


@dataclass(frozen=True)
class SurfaceBlueprint:
    """Symbolic description of the glued disk metric for given weights."""

    weights: StarWeights
    epsilon: float
    boundary_tube: TubeSpec
    spoke_tubes: tuple[TubeSpec, ...]
    caps: tuple[CapSpec, ...]
    hub: HubSpec
    rectangle: RectanglePatch | None = None

    @property
    def n(self) -> int:
        return self.weights.n

    def total_area(self) -> float:
        """Area under the unscaled metric; equals sum(mu) by construction."""
        area = self.hub.target_area + self.boundary_tube.area
        area += sum(c.target_area for c in self.caps)
        area += sum(t.area for t in self.spoke_tubes)
        return area

    def scaled_area(self) -> float:
        """Area under the eps-scaled metric, plus the rectangle if present."""
        area = self.epsilon * self.total_area()
        if self.rectangle is not None:
            area += self.rectangle.area
        return area

    def dirichlet_circle_length(self) -> float:
        """True (eps-scaled) length of the Dirichlet waist circle."""
        return math.sqrt(self.epsilon) * self.boundary_tube.waist

    def to_dict(self) -> dict:
        patches = [
            {
                "type": "tube",
                "role": "boundary",
                "waist": self.boundary_tube.waist,
                "chart_length": self.boundary_tube.chart_length,
                "copies": 1,
                "area": self.boundary_tube.area,
            }
        ]
        gluing = [["tube:boundary:wide", "hub:outer"]]
        for i, (t, c) in enumerate(zip(self.spoke_tubes, self.caps), start=1):
            patches.append(
                {
                    "type": "tube",
                    "role": "spoke",
                    "index": i,
                    "waist": t.waist,
                    "chart_length": t.chart_length,
                    "copies": 2,
                    "area": t.area,
                }
            )
            patches.append(
                {
                    "type": "cap",
                    "index": i,
                    "area": c.target_area,
                    "cylinder_height": c.cylinder_height,
                }
            )
            gluing.append([f"hub:port:{i}", f"tube:spoke:{i}:hub_end"])
            gluing.append([f"tube:spoke:{i}:cap_end", f"cap:{i}:base"])
        patches.append(
            {
                "type": "hub",
                "area": self.hub.target_area,
                "n_ports": self.hub.n_ports,
                "frustum_height": self.hub.frustum_height,
                "port_height": self.hub.port_height,
                "cylinder_height": self.hub.cylinder_height,
            }
        )
        rect = None
        if self.rectangle is not None:
            r = self.rectangle
            rect = {"a": r.a, "b": r.b, "c": r.c, "s_center": r.s_center}
            gluing.append(["tube:boundary:waist_arc", "rectangle:base_interval"])
        return {
            "weights": self.weights.to_dict(),
            "epsilon": self.epsilon,
            "patches": patches,
            "gluing": gluing,
            "rectangle": rect,
            "area": {"unscaled": self.total_area(), "scaled": self.scaled_area()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SurfaceBlueprint":
        try:
            w = StarWeights.from_dict(d["weights"])
            bp = blueprint_from_weights(w, d["epsilon"], _validate_normalized=False)
            r = d.get("rectangle")
            if r is not None:
                bp = replace(
                    bp,
                    rectangle=RectanglePatch(
                        a=r["a"], b=r["b"], c=r["c"], s_center=r.get("s_center", 0.5)
                    ),
                )
            return bp
        except KeyError as e:
            raise ValidationError(f"blueprint object missing key {e}") from e


def _make_tube(l: float, copies: int, budget_name: str) -> TubeSpec:
    try:
        L, _ = tube_geometry(l)
    except InfeasibleEpsilonError as e:
        raise InfeasibleEpsilonError(f"{budget_name}: {e}") from None
    return TubeSpec(waist=l, chart_length=L, copies=copies)


def blueprint_from_weights(
    w: StarWeights, epsilon: float, _validate_normalized: bool = True
) -> SurfaceBlueprint:
    """Assemble the glued-surface blueprint for weights ``w`` at ``epsilon``.

    Raises
    ------
    InfeasibleEpsilonError
        Naming the violated budget: a waist circumference >= 1, or a cap or
        hub area below its floor after the tube areas are deducted.
    """
    if not epsilon > 0.0:
        raise ValidationError(f"epsilon must be positive, got {epsilon}")
    n = w.n
    bt = _make_tube(w.theta * math.pi * epsilon / 2.0, 1, "boundary tube")
    spokes = tuple(
        _make_tube(t * math.pi * epsilon, 2, f"spoke tube {i}")
        for i, t in enumerate(w.theta_i, start=1)
    )
    caps = []
    for i, (mu_i, tube) in enumerate(zip(w.mu[1:], spokes), start=1):
        cap_area = mu_i - tube.area / 2.0  # one of the two copies
        if cap_area <= CAP_AREA + _AREA_FLOOR:
            raise InfeasibleEpsilonError(
                f"cap {i} area budget {cap_area:.6g} below floor "
                f"{CAP_AREA + _AREA_FLOOR:.6g} (mu_{i} too small for this epsilon)"
            )
        caps.append(CapSpec(target_area=cap_area, cylinder_height=cap_area - CAP_AREA))
    hub_area = w.mu[0] - bt.area - sum(t.area / 2.0 for t in spokes)
    if n == 1:
        if hub_area <= CAP_AREA + _AREA_FLOOR:
            raise InfeasibleEpsilonError(
                f"hub area budget {hub_area:.6g} below floor {CAP_AREA + _AREA_FLOOR:.6g}"
            )
        hub = HubSpec(target_area=hub_area, n_ports=1, cylinder_height=hub_area - CAP_AREA)
    else:
        if hub_area <= _AREA_FLOOR * n:
            raise InfeasibleEpsilonError(
                f"hub area budget {hub_area:.6g} below floor {_AREA_FLOOR * n:.6g} "
                "(mu_0 too small for this epsilon)"
            )
        frustum_h = min(0.5, hub_area / n)
        port_h = (hub_area - frustum_h * n / 2.0) / (n - 1)
        hub = HubSpec(
            target_area=hub_area,
            n_ports=n,
            frustum_height=frustum_h,
            port_height=port_h,
        )
    return SurfaceBlueprint(
        weights=w,
        epsilon=epsilon,
        boundary_tube=bt,
        spoke_tubes=spokes,
        caps=tuple(caps),
        hub=hub,
    )


def _tube_mass_integrals(tube: TubeSpec) -> tuple[float, float, float]:
    """(int psi_hub^2, int psi_far^2, int psi_hub psi_far) over a doubled tube."""
    l, L = tube.waist, tube.chart_length
    u_hub = tube_harmonic_profile(l, 2, hub_value=1.0, far_value=0.0)
    u_far = tube_harmonic_profile(l, 2, hub_value=0.0, far_value=1.0)

    def q(f):
        val, _ = scipy.integrate.quad(
            lambda x: f(x) * l * math.cosh(x), -L, L, limit=200, epsabs=1e-12, epsrel=1e-12
        )
        return val

    return q(lambda x: u_hub(x) ** 2), q(lambda x: u_far(x) ** 2), q(lambda x: u_hub(x) * u_far(x))


def model_matrices(bp: SurfaceBlueprint) -> tuple[np.ndarray, np.ndarray]:
    """Quadratic form and inner product on the model subspace.

    Basis function j is 1 on patch j (hub for j = 0, cap j otherwise),
    harmonic on the tubes, 0 elsewhere.  Q_F comes from the closed-form
    harmonic tube energies, M_F from the exact patch areas plus quadrature
    of the harmonic profiles against the tube area element.  Both refer to
    the unscaled metric: as eps -> 0, (1/eps) Q_F tends to Q and M_F to M
    of the star pencil.
    """
    n = bp.n
    k_bt = harmonic_tube_energy(bp.boundary_tube.waist, 1.0, 0.0, 1)
    k = np.array([harmonic_tube_energy(t.waist, 1.0, 0.0, 2) for t in bp.spoke_tubes])
    Q = np.zeros((n, n))
    Q[0, 0] = k_bt + k.sum()
    for i, ki in enumerate(k, start=1):
        Q[0, i] = Q[i, 0] = -ki
        Q[i, i] = ki

    M = np.zeros((n, n))
    # boundary tube carries only the hub basis function
    l, L = bp.boundary_tube.waist, bp.boundary_tube.chart_length
    u0 = tube_harmonic_profile(l, 1, hub_value=1.0, far_value=0.0)
    bt_mass, _ = scipy.integrate.quad(
        lambda x: u0(x) ** 2 * l * math.cosh(x), 0.0, L, limit=200, epsabs=1e-12, epsrel=1e-12
    )
    M[0, 0] = bp.hub.target_area + bt_mass
    for i, (tube, cap) in enumerate(zip(bp.spoke_tubes, bp.caps), start=1):
        m_hub, m_far, m_cross = _tube_mass_integrals(tube)
        M[0, 0] += m_hub
        M[i, i] = cap.target_area + m_far
        M[0, i] = M[i, 0] = m_cross
    return Q, M


def model_spectrum(bp: SurfaceBlueprint, scaled: bool = True) -> np.ndarray:
    """Eigenvalues of the model pencil, under the eps-scaled metric by default.

    Stiffness is invariant under scaling a 2D metric while mass scales
    linearly, so the scaled spectrum is eig(Q_F, eps * M_F).
    """
    Q, M = model_matrices(bp)
    lam = np.sort(scipy.linalg.eigh(Q, M, eigvals_only=True))
    return lam / bp.epsilon if scaled else lam


def attach_rectangle(
    bp: SurfaceBlueprint, A_total: float, M_gap: float
) -> SurfaceBlueprint:
    """Record a flat rectangle bringing the eps-scaled total area to A_total.

    The sides satisfy a*b = A_total - scaled_area(bp) and
    pi^2 (1/a^2 + 1/b^2) >= 2 M_gap, so the rectangle's own Dirichlet gap
    stays above twice the requested spectral floor; the attachment interval
    is c = min(0.1 a, 1/M_gap), further capped at half the Dirichlet circle.
    """
    if bp.rectangle is not None:
        raise ValidationError("blueprint already carries a rectangle")
    if not M_gap > 0.0:
        raise ValidationError(f"M_gap must be positive, got {M_gap}")
    current = bp.scaled_area()
    extra = A_total - current
    if abs(extra) <= 1e-12 * max(1.0, A_total):
        return bp
    if extra < 0.0:
        raise InfeasibleAreaError(
            f"target area {A_total:.6g} below the blueprint's scaled area {current:.6g}"
        )
    a = math.pi / math.sqrt(2.0 * M_gap)
    a = min(a, math.sqrt(extra))  # keep a the short side; the gap only grows
    b = extra / a
    if b / a > 1e5:
        raise InfeasibleAreaError(
            f"rectangle aspect {b / a:.3g} unmeshable: requested area {A_total:.6g} "
            f"too large relative to M_gap={M_gap:.6g}; increase M_gap moderately "
            "or lower the area"
        )
    c = min(0.1 * a, 1.0 / M_gap, 0.5 * bp.dirichlet_circle_length())
    rect = RectanglePatch(a=a, b=b, c=c)
    assert rect.dirichlet_gap >= 2.0 * M_gap * (1.0 - 1e-12)
    return replace(bp, rectangle=rect)

"""Complex-plane polygon construction, disc partitioning, and area measurement.

Assessment rows living in the unit hypercube are mapped to star polygons on
the closed unit disc: the k-th score is placed on the ray of the k-th root of
unity. The disc is partitioned into annular-sector cells, and the feature
vector of a polygon is the area it covers in each cell.

Cells are stored as polygonal approximations of ring segments. Coverage is
computed as a difference of convex "pie" clips, which guarantees that cell
coverages add up to the polygon area: the per-annulus differences telescope.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ANNULUS_TYPES = ("s-invariant", "r-invariant", "tree")
SECTOR_TYPES = ("miss", "cover")

DEFAULT_ARC_RESOLUTION = 64


def roots_of_unity(d: int) -> np.ndarray:
    """d-th roots of unity, anticlockwise from 1, as a complex vector."""
    if d <= 2:
        raise ValueError(f"need more than 2 domains to form a polygon, got d={d}")
    k = np.arange(d)
    theta = 2.0 * np.pi * k / d
    return np.cos(theta) + 1j * np.sin(theta)


def uh_to_ud(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map unit-scaled score rows to polygons on the unit disc.

    Returns an (m, d) complex matrix Z whose row i holds the vertices of the
    i-th assessment polygon (vertex k at x_ik * zeta_k), together with the
    roots of unity zeta. Scores must lie in (0, 1]: zeros would collapse a
    vertex onto the origin and degenerate the polygon.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    m, d = X.shape
    zeta = roots_of_unity(d)
    bad = np.argwhere((X <= 0.0) | (X > 1.0))
    if bad.size:
        i, k = bad[0]
        raise ValueError(
            f"score out of (0, 1] at row {i}, column {k}: {X[i, k]!r}"
        )
    return X * zeta[np.newaxis, :], zeta


def polygon_area(vertices: np.ndarray) -> float | np.ndarray:
    """Shoelace area of a closed polygonal chain given as complex vertices.

    Accepts a single polygon (1-d array) or a batch (2-d, one polygon per
    row). The chain is closed implicitly. Degenerate chains return 0.
    """
    v = np.asarray(vertices, dtype=complex)
    single = v.ndim == 1
    v = np.atleast_2d(v)
    if v.shape[1] < 3:
        out = np.zeros(v.shape[0])
        return float(out[0]) if single else out
    nxt = np.roll(v, -1, axis=1)
    cross = v.real * nxt.imag - v.imag * nxt.real
    area = np.abs(cross.sum(axis=1)) / 2.0
    return float(area[0]) if single else area


def convex_clip(subject: np.ndarray, clip: np.ndarray) -> np.ndarray:
    """Sutherland-Hodgman clip of a polygon against a convex, CCW clip polygon.

    Both polygons are complex vertex arrays. The subject may be non-convex;
    the returned chain encloses exactly the intersection region.
    """
    output = list(np.asarray(subject, dtype=complex))
    clip = np.asarray(clip, dtype=complex)
    n = len(clip)
    for idx in range(n):
        if not output:
            break
        a = clip[idx]
        b = clip[(idx + 1) % n]
        edge = b - a
        pts = np.array(output)
        # positive cross product = point on the left (inside) of edge a->b
        side = edge.real * (pts.imag - a.imag) - edge.imag * (pts.real - a.real)
        inside = side >= 0.0
        result: list[complex] = []
        for j in range(len(pts)):
            cur, prev = pts[j], pts[j - 1]
            if inside[j]:
                if not inside[j - 1]:
                    result.append(_line_intersect(prev, cur, a, b))
                result.append(cur)
            elif inside[j - 1]:
                result.append(_line_intersect(prev, cur, a, b))
        output = result
    return np.array(output, dtype=complex)


def _line_intersect(p: complex, q: complex, a: complex, b: complex) -> complex:
    d1 = q - p
    d2 = b - a
    denom = d1.real * d2.imag - d1.imag * d2.real
    t = ((a.real - p.real) * d2.imag - (a.imag - p.imag) * d2.real) / denom
    return p + t * d1


@dataclass(frozen=True)
class DiscPartition:
    """Enumerated annular-sector cells of the unit disc.

    Cells are enumerated anticlockwise, inner annulus first: cell r = p*n_s+q
    is the intersection of annulus p (origin outwards) and sector q. Each
    cell is stored as a closed polygonal ring-segment approximation.
    """

    n_a: int
    n_s: int
    annulus_type: str
    sector_type: str
    radii: np.ndarray            # ascending outer radii, last one 1.0
    sector_start: float          # angle of the first sector boundary
    arc_resolution: int          # requested points per cell arc
    cells: list[np.ndarray] = field(repr=False)
    # angular grid shared by all cells: boundary angles of the thin wedges
    # used both to build cell polygons and to compute coverages.
    _angles: np.ndarray = field(repr=False)
    _seg_per_arc: int = field(repr=False)

    @property
    def n_cells(self) -> int:
        return self.n_a * self.n_s

    def cell_areas(self) -> np.ndarray:
        outer = self.radii
        inner = np.concatenate(([0.0], outer[:-1]))
        seg = self._seg_per_arc
        sines = np.sin(np.diff(self._angles))
        arc_factor = sines.reshape(self.n_s, seg).sum(axis=1)
        ring = 0.5 * (outer**2 - inner**2)
        return (ring[:, None] * arc_factor[None, :]).ravel()


def partition_ud(
    n_a: int,
    n_s: int,
    annulus_type: str = "s-invariant",
    sector_type: str = "miss",
    tree_radii: np.ndarray | None = None,
    arc_resolution: int = DEFAULT_ARC_RESOLUTION,
    d: int | None = None,
) -> DiscPartition:
    """Partition the unit disc into n_a * n_s annular-sector cells.

    Radii depend on the annulus type: equal-area annuli use sqrt((p+1)/n_a),
    equal-width annuli use (p+1)/n_a, and "tree" annuli take the supplied
    ascending thresholds capped by 1.0. Sector placement: "miss" starts the
    first sector at zero radians; "cover" shifts it so every domain axis
    bisects a sector.

    When d is given, n_s must be a positive multiple of d (one or more
    sectors per domain).
    """
    if n_a < 1:
        raise ValueError(f"n_a must be >= 1, got {n_a}")
    if n_s < 1:
        raise ValueError(f"n_s must be >= 1, got {n_s}")
    if annulus_type not in ANNULUS_TYPES:
        raise ValueError(f"unknown annulus type {annulus_type!r}")
    if sector_type not in SECTOR_TYPES:
        raise ValueError(f"unknown sector type {sector_type!r}")
    if d is not None and n_s % d != 0:
        raise ValueError(f"n_s={n_s} is not a multiple of d={d}")

    p = np.arange(1, n_a + 1, dtype=float)
    if annulus_type == "s-invariant":
        radii = np.sqrt(p / n_a)
    elif annulus_type == "r-invariant":
        radii = p / n_a
    else:
        if tree_radii is None:
            raise ValueError("annulus_type 'tree' requires tree_radii")
        thresholds = np.asarray(tree_radii, dtype=float)
        if len(thresholds) != n_a - 1:
            raise ValueError(
                f"tree partition with n_a={n_a} needs {n_a - 1} thresholds, "
                f"got {len(thresholds)}"
            )
        if np.any(thresholds <= 0.0) or np.any(thresholds >= 1.0):
            raise ValueError("tree radii must lie strictly inside (0, 1)")
        if np.any(np.diff(thresholds) <= 0.0):
            raise ValueError("tree radii must be strictly ascending")
        radii = np.concatenate((thresholds, [1.0]))
    radii[-1] = 1.0

    sector_start = 0.0 if sector_type == "miss" else -np.pi / n_s

    # An even number of segments per arc keeps the sector midpoints on the
    # angular grid, so polygon vertices sitting on domain axes never poke
    # outside the inscribed pie approximations ("cover" puts axes at
    # midpoints). This is what makes coverage conservation exact.
    seg = max(2, arc_resolution)
    if seg % 2:
        seg += 1
    n_angles = n_s * seg + 1
    angles = sector_start + np.arange(n_angles) * (2.0 * np.pi / (n_s * seg))

    cells: list[np.ndarray] = []
    inner_radii = np.concatenate(([0.0], radii[:-1]))
    unit_arc = np.cos(angles) + 1j * np.sin(angles)
    for pi in range(n_a):
        r_in, r_out = inner_radii[pi], radii[pi]
        for q in range(n_s):
            arc = unit_arc[q * seg : (q + 1) * seg + 1]
            outer = r_out * arc
            if r_in == 0.0:
                ring = np.concatenate((outer, [0.0 + 0.0j]))
            else:
                ring = np.concatenate((outer, r_in * arc[::-1]))
            cells.append(ring)

    return DiscPartition(
        n_a=n_a,
        n_s=n_s,
        annulus_type=annulus_type,
        sector_type=sector_type,
        radii=radii,
        sector_start=sector_start,
        arc_resolution=arc_resolution,
        cells=cells,
        _angles=angles,
        _seg_per_arc=seg,
    )


def pie_polygon(part: DiscPartition, q: int, radius: float) -> np.ndarray:
    """Convex polygonal approximation of the circular sector q at a radius."""
    seg = part._seg_per_arc
    arc = part._angles[q * seg : (q + 1) * seg + 1]
    pts = radius * (np.cos(arc) + 1j * np.sin(arc))
    return np.concatenate(([0.0 + 0.0j], pts))


def cell_coverage(Z: np.ndarray, part: DiscPartition) -> np.ndarray:
    """Feature vectors: area of each polygon covering each partition cell.

    Z is an (m, d) complex matrix of assessment polygons (or a single
    polygon as a 1-d array). Returns an (m, n_a*n_s) matrix S with
    s[i, p*n_s+q] = area(Z_i intersect cell (p, q)); rows sum to the
    polygon areas.

    The computation exploits that both the polygon and the pie
    approximations are star-shaped about the origin and that every polygon
    vertex angle lies on the partition's angular grid: inside each thin
    angular wedge both boundaries are single chords, so the intersection
    area follows from at most one chord crossing per wedge.
    """
    Z = np.asarray(Z, dtype=complex)
    single = Z.ndim == 1
    Z = np.atleast_2d(Z)
    m, d = Z.shape
    if part.n_s % d != 0:
        raise ValueError(f"partition with n_s={part.n_s} incompatible with d={d}")

    angles = part._angles
    n_seg_total = len(angles) - 1
    # which polygon edge (domain pair) spans each angular boundary / wedge
    mid = (angles[:-1] + angles[1:]) / 2.0
    edge_of_wedge = (np.mod(mid, 2.0 * np.pi) // (2.0 * np.pi / d)).astype(int) % d
    edge_of_angle_lo = edge_of_wedge  # edge covering the wedge right of angle j
    # radial distance of the polygon boundary along every grid ray:
    # intersect ray u with the chord P->Q of the covering edge.
    u = np.cos(angles) + 1j * np.sin(angles)
    k_lo = np.concatenate((edge_of_angle_lo, [edge_of_angle_lo[-1]]))
    P = Z[:, k_lo % d]
    Q = Z[:, (k_lo + 1) % d]
    cross_pq = P.real * Q.imag - P.imag * Q.real          # (m, n_angles)
    dir_pq = Q - P
    denom = u.real[None, :] * dir_pq.imag - u.imag[None, :] * dir_pq.real
    rho = cross_pq / denom                                 # (m, n_angles)

    sin_d = np.sin(np.diff(angles))                        # per-wedge sine
    rho1 = rho[:, :-1]
    rho2 = rho[:, 1:]
    tri_subject = 0.5 * rho1 * rho2 * sin_d[None, :]       # (m, n_wedges)

    a1 = u[:-1]
    a2 = u[1:]

    inner_prev = np.zeros((m, n_seg_total))
    features = np.empty((m, part.n_cells))
    for pi, r in enumerate(part.radii):
        covered = _wedge_areas(rho1, rho2, sin_d, a1, a2, r, tri_subject)
        ring = covered - inner_prev
        features[:, pi * part.n_s : (pi + 1) * part.n_s] = (
            ring.reshape(m, part.n_s, part._seg_per_arc).sum(axis=2)
        )
        inner_prev = covered
    return features[0] if single else features


def _wedge_areas(rho1, rho2, sin_d, a1, a2, r, tri_subject):
    """Area, per thin wedge, below both the polygon chord and the pie chord."""
    d1 = rho1 - r
    d2 = rho2 - r
    tri_pie = 0.5 * r * r * sin_d

    sub_lower = (d1 <= 0.0) & (d2 <= 0.0)
    pie_lower = ~sub_lower & (d1 >= 0.0) & (d2 >= 0.0)
    crossing = ~sub_lower & ~pie_lower

    out = np.where(sub_lower, tri_subject, tri_pie[None, :])
    if np.any(crossing):
        A = rho1 * a1[None, :]
        B = rho2 * a2[None, :]
        Pp = r * a1
        Qp = r * a2
        dAB = B - A
        dPQ = (Qp - Pp)[None, :]
        denom = dAB.real * dPQ.imag - dAB.imag * dPQ.real
        diff = Pp[None, :] - A
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (diff.real * dPQ.imag - diff.imag * dPQ.real) / denom
        X = A + t * dAB
        # lower chord on the first ray is the subject iff d1 < 0
        first = np.where(d1 < 0.0, A, Pp[None, :])
        second = np.where(d1 < 0.0, Qp[None, :], B)
        area_x = 0.5 * (
            first.real * X.imag - first.imag * X.real
            + X.real * second.imag - X.imag * second.real
        )
        out = np.where(crossing, area_x, out)
    return out


def cell_coverage_clip(Z: np.ndarray, part: DiscPartition) -> np.ndarray:
    """Reference coverage via explicit convex clipping (difference of pies).

    Computes the same quantities as cell_coverage by clipping each polygon
    against the pie approximation of every annulus boundary and differencing
    consecutive radii. Quadratic and slow; kept as an independent check.
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    m = Z.shape[0]
    features = np.empty((m, part.n_cells))
    for i in range(m):
        subject = Z[i]
        for q in range(part.n_s):
            prev = 0.0
            for pi, r in enumerate(part.radii):
                clipped = convex_clip(subject, pie_polygon(part, q, r))
                area = polygon_area(clipped) if len(clipped) >= 3 else 0.0
                features[i, pi * part.n_s + q] = area - prev
                prev = area
    return features

"""Triangular meshes, their ASCII file format and two benchmark generators."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import MeshError

LABELS = ("bottom", "top", "left", "right", "crack")


@dataclass
class Mesh2D:
    """P1 triangulation with tagged boundary edges.

    ``crack_segment`` is ``((x0, y0), (x1, y1))``; when omitted it is taken
    as the span of ``crack_nodes``.
    """

    nodes: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), int))
    boundary_labels: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=object))
    crack_nodes: np.ndarray = field(default_factory=lambda: np.zeros(0, int))
    crack_segment: tuple | None = None

    def __post_init__(self):
        self.nodes = np.ascontiguousarray(self.nodes, dtype=float).reshape(-1, 2)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        self.boundary_edges = np.asarray(self.boundary_edges, dtype=np.int64).reshape(-1, 2)
        self.boundary_labels = np.asarray(self.boundary_labels, dtype=object).reshape(-1)
        self.crack_nodes = np.asarray(self.crack_nodes, dtype=np.int64).reshape(-1)
        if self.boundary_labels.size != self.boundary_edges.shape[0]:
            raise MeshError("one label per boundary edge is required")

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def n_triangles(self):
        return self.triangles.shape[0]

    def signed_areas(self):
        p = self.nodes[self.triangles]
        d1, d2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def diameter(self):
        lo, hi = self.nodes.min(axis=0), self.nodes.max(axis=0)
        return float(np.hypot(*(hi - lo)))

    def bounding_box(self):
        return self.nodes.min(axis=0), self.nodes.max(axis=0)

    def area(self):
        return float(self.signed_areas().sum())

    def boundary_nodes(self, label):
        if label not in LABELS:
            raise MeshError(f"unknown boundary label {label!r}")
        sel = self.boundary_edges[self.boundary_labels == label]
        return np.unique(sel.ravel())

    def edge_lengths(self, label):
        sel = self.boundary_edges[self.boundary_labels == label]
        d = self.nodes[sel[:, 1]] - self.nodes[sel[:, 0]]
        return sel, np.hypot(d[:, 0], d[:, 1])

    def max_edge_length(self, region=None):
        """Longest element edge, optionally among triangles whose centroid is in ``region``.

        ``region`` is ``(xmin, xmax, ymin, ymax)``.
        """
        tri = self.triangles
        if region is not None:
            c = self.nodes[tri].mean(axis=1)
            x0, x1, y0, y1 = region
            tri = tri[(c[:, 0] >= x0) & (c[:, 0] <= x1) & (c[:, 1] >= y0) & (c[:, 1] <= y1)]
        p = self.nodes[tri]
        e = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2]], axis=1)
        return float(np.sqrt((e**2).sum(axis=2)).max()) if tri.size else 0.0

    def element_sizes(self):
        """Per-triangle size ``sqrt(2 * area)``; the leg length for right isosceles cells."""
        return np.sqrt(2.0 * np.abs(self.signed_areas()))

    def max_element_size(self, region):
        """Largest :meth:`element_sizes` among triangles with centroid in ``(x0, x1, y0, y1)``."""
        c = self.nodes[self.triangles].mean(axis=1)
        x0, x1, y0, y1 = region
        sel = (c[:, 0] >= x0) & (c[:, 0] <= x1) & (c[:, 1] >= y0) & (c[:, 1] <= y1)
        return float(self.element_sizes()[sel].max()) if sel.any() else 0.0

    def resolved_crack_segment(self):
        if self.crack_segment is not None:
            return tuple(map(tuple, np.asarray(self.crack_segment, float)))
        if self.crack_nodes.size == 0:
            return None
        p = self.nodes[self.crack_nodes]
        c = p.mean(axis=0)
        d = p - c
        _, _, vt = np.linalg.svd(d, full_matrices=False)
        t = d @ vt[0]
        return tuple(c + t.min() * vt[0]), tuple(c + t.max() * vt[0])

    def validate(self):
        """Raise :class:`MeshError` for inverted, degenerate or non-conforming meshes."""
        n = self.n_nodes
        if self.triangles.size and (self.triangles.min() < 0 or self.triangles.max() >= n):
            raise MeshError("triangle references a node that does not exist")
        area = self.signed_areas()
        bad = np.flatnonzero(~(area > 0))
        if bad.size:
            raise MeshError(f"triangle {int(bad[0])} has non-positive signed area {area[bad[0]]:.3e}")
        # conformity: each directed edge at most once, so neighbors share node pairs
        t = self.triangles
        directed = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        key = directed[:, 0] * n + directed[:, 1]
        if np.unique(key).size != key.size:
            raise MeshError("mesh is not conforming: an oriented edge is used twice")
        if self.boundary_edges.size:
            if self.boundary_edges.min() < 0 or self.boundary_edges.max() >= n:
                raise MeshError("boundary edge references a node that does not exist")
            bad_lab = [lab for lab in set(self.boundary_labels.tolist()) if lab not in LABELS]
            if bad_lab:
                raise MeshError(f"unknown boundary labels {bad_lab}")
        if self.crack_nodes.size:
            if self.crack_nodes.min() < 0 or self.crack_nodes.max() >= n:
                raise MeshError("crack node index out of range")
            a, b = (np.asarray(v) for v in self.resolved_crack_segment())
            p = self.nodes[self.crack_nodes]
            ab = b - a
            L2 = float(ab @ ab)
            t = np.clip(((p - a) @ ab) / L2, 0.0, 1.0) if L2 > 0 else np.zeros(len(p))
            dist = np.hypot(*(p - (a + t[:, None] * ab)).T)
            tol = 1e-12 * self.diameter()
            if np.any(dist > tol):
                raise MeshError("crack nodes do not lie on the declared crack segment")
        return self


# -- ASCII format ------------------------------------------------------------

def write_mesh(path, mesh: Mesh2D):
    """Write the whitespace-separated text format read by :func:`read_mesh`."""
    with open(path, "w") as fh:
        fh.write(f"nodes {mesh.n_nodes}\n")
        for x, y in mesh.nodes:
            fh.write(f"{float(x)!r} {float(y)!r}\n")
        fh.write(f"triangles {mesh.n_triangles}\n")
        for i, j, k in mesh.triangles:
            fh.write(f"{i} {j} {k}\n")
        fh.write(f"boundary {mesh.boundary_edges.shape[0]}\n")
        for (i, j), lab in zip(mesh.boundary_edges, mesh.boundary_labels):
            fh.write(f"{i} {j} {lab}\n")
        if mesh.crack_nodes.size:
            fh.write(f"crack {mesh.crack_nodes.size}\n")
            for i in mesh.crack_nodes:
                fh.write(f"{i}\n")


def read_mesh(path) -> Mesh2D:
    """Parse a mesh file; any structural problem raises :class:`MeshError`."""
    try:
        with open(path) as fh:
            lines = [ln.split() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    except OSError as exc:
        raise MeshError(f"cannot read mesh file {path}: {exc}") from exc
    pos = 0

    def block(name, width, parse):
        nonlocal pos
        if pos >= len(lines) or lines[pos][0] != name or len(lines[pos]) != 2:
            raise MeshError(f"expected '{name} <count>' header at record {pos + 1}")
        try:
            count = int(lines[pos][1])
        except ValueError as exc:
            raise MeshError(f"bad count in '{name}' header") from exc
        rows = lines[pos + 1: pos + 1 + count]
        if len(rows) != count or any(len(r) != width for r in rows):
            raise MeshError(f"section '{name}' needs {count} rows of {width} fields")
        pos += 1 + count
        try:
            return [parse(r) for r in rows]
        except ValueError as exc:
            raise MeshError(f"malformed entry in section '{name}': {exc}") from exc

    nodes = block("nodes", 2, lambda r: (float(r[0]), float(r[1])))
    tris = block("triangles", 3, lambda r: tuple(int(v) for v in r))
    bnd = block("boundary", 3, lambda r: (int(r[0]), int(r[1]), r[2]))
    crack = []
    if pos < len(lines):
        crack = block("crack", 1, lambda r: int(r[0]))
    if pos != len(lines):
        raise MeshError(f"unexpected content after record {pos}")
    mesh = Mesh2D(np.array(nodes, float).reshape(-1, 2), np.array(tris, int).reshape(-1, 3),
                  np.array([b[:2] for b in bnd], int).reshape(-1, 2),
                  np.array([b[2] for b in bnd], dtype=object), np.array(crack, int))
    return mesh.validate()


# -- generators --------------------------------------------------------------

def graded_axis(lo, hi, fine_lo, fine_hi, h_fine, h_coarse, growth=1.25, anchors=()):
    """Coordinates on ``[lo, hi]``: spacing ``<= h_fine`` on ``[fine_lo, fine_hi]``,
    growing geometrically by ``growth`` up to ``h_coarse`` outside.

    Every value in ``anchors`` that lies in the fine window is hit exactly.
    """
    if not (0 < h_fine <= h_coarse):
        raise MeshError("need 0 < h_fine <= h_coarse")
    if not growth >= 1.0:
        raise MeshError("growth factor must be >= 1")
    fine_lo, fine_hi = max(lo, fine_lo), min(hi, fine_hi)
    if not fine_lo < fine_hi:
        raise MeshError("fine window does not intersect the axis")
    knots = sorted({fine_lo, fine_hi, *[a for a in anchors if fine_lo < a < fine_hi]})
    fine = [knots[0]]
    for a, b in zip(knots[:-1], knots[1:]):
        k = max(1, int(np.ceil((b - a) / h_fine - 1e-9)))
        fine.extend(np.linspace(a, b, k + 1)[1:].tolist())

    def grow(start, stop):
        pts, h, x = [], h_fine, start
        span = abs(stop - start)
        sgn = 1.0 if stop > start else -1.0
        while True:
            h = min(h * growth, h_coarse)
            if abs(x - start) + h >= span - 0.5 * h:
                break
            x = x + sgn * h
            pts.append(x)
        return pts

    left = grow(fine_lo, lo)[::-1] if fine_lo > lo else []
    right = grow(fine_hi, hi) if fine_hi < hi else []
    axis = np.array(([lo] if fine_lo > lo else []) + left + fine + right + ([hi] if fine_hi < hi else []))
    return axis


def _grid_triangles(nx, ny, xs, ys, flip_rule):
    """Split each cell of an ``nx x ny`` grid into two CCW triangles."""
    I, J = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    I, J = I.ravel(), J.ravel()
    n00 = I * (ny + 1) + J
    n10 = (I + 1) * (ny + 1) + J
    n01 = I * (ny + 1) + J + 1
    n11 = (I + 1) * (ny + 1) + J + 1
    xc = 0.5 * (xs[I] + xs[I + 1])
    yc = 0.5 * (ys[J] + ys[J + 1])
    flip = flip_rule(xc, yc)
    # diagonal 00-11 or 10-01
    t_a = np.where(flip[:, None], np.stack([n00, n10, n01], 1), np.stack([n00, n10, n11], 1))
    t_b = np.where(flip[:, None], np.stack([n10, n11, n01], 1), np.stack([n00, n11, n01], 1))
    tri = np.empty((2 * I.size, 3), np.int64)
    tri[0::2], tri[1::2] = t_a, t_b
    return tri, xc, yc


def _outer_boundary(nx, ny):
    def nid(i, j):
        return i * (ny + 1) + j
    edges, labels = [], []
    for i in range(nx):
        edges.append((nid(i, 0), nid(i + 1, 0)))
        labels.append("bottom")
        edges.append((nid(i + 1, ny), nid(i, ny)))
        labels.append("top")
    for j in range(ny):
        edges.append((nid(nx, j), nid(nx, j + 1)))
        labels.append("right")
        edges.append((nid(0, j + 1), nid(0, j)))
        labels.append("left")
    return edges, labels


def _crack_normal_axis(b, band, h_crack, h_fine, h_coarse, growth):
    """Non-negative y coordinates: ``h_crack`` at 0 growing to ``h_fine`` inside the band."""
    ys, h = [0.0], h_crack
    while ys[-1] + h < band - 0.5 * h_fine and h < h_fine:
        ys.append(ys[-1] + h)
        h = min(h * growth, h_fine)
    k = max(1, int(np.ceil((band - ys[-1]) / h_fine - 1e-9)))
    ys.extend(np.linspace(ys[-1], band, k + 1)[1:].tolist())
    rest = graded_axis(-band, b, -band, band, h_fine, h_coarse, growth)
    return np.array(ys + rest[rest > band].tolist())


def generate_rect_mesh(a, b, crack_l0, h_fine, h_coarse, band=None, growth=1.25, ell=None,
                       h_crack=None):
    """Mesh of ``(-a, a) x (-b, b)`` refined around the crack ``|x| <= l0, y = 0``.

    The fine band covers ``|x| <= l0 + band`` and ``|y| <= band``; ``band``
    defaults to ``6 ell`` when ``ell`` is given.  With ``h_crack`` the row
    spacing normal to the crack starts at ``h_crack`` on ``y = 0`` and grows
    geometrically to ``h_fine``; a fully softened layer along the crack has
    to be thin for the crack to open.  Grid lines pass through
    ``x = 0, +-l0`` and ``y = 0`` and cell diagonals are mirrored across both
    axes, so the mesh is symmetric about the crack line and the mid-plane.
    """
    if band is None:
        if ell is None:
            raise MeshError("give either band or ell")
        band = 6.0 * ell
    if ell is not None and band < 6.0 * ell * (1 - 1e-12):
        raise MeshError("fine band half-width must be at least 6 ell")
    if not (0 < crack_l0 < a and band > 0 and crack_l0 + band <= a and band <= b):
        raise MeshError("crack and band must fit inside the domain")
    xs = graded_axis(-a, a, -crack_l0 - band, crack_l0 + band, h_fine, h_coarse, growth,
                     anchors=(-crack_l0, 0.0, crack_l0))
    if h_crack is not None:
        if not 0 < h_crack <= h_fine:
            raise MeshError("need 0 < h_crack <= h_fine")
        ys = _symmetrize(_crack_normal_axis(b, band, h_crack, h_fine, h_coarse, growth))
    else:
        ys = _symmetrize(graded_axis(-b, b, -band, band, h_fine, h_coarse, growth, anchors=(0.0,)))
    xs = _symmetrize(xs)
    nx, ny = xs.size - 1, ys.size - 1
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    nodes = np.column_stack([X.ravel(), Y.ravel()])
    tri, _, _ = _grid_triangles(nx, ny, xs, ys, lambda xc, yc: xc * yc < 0)
    edges, labels = _outer_boundary(nx, ny)
    on_crack = (np.abs(nodes[:, 1]) == 0.0) & (np.abs(nodes[:, 0]) <= crack_l0 * (1 + 1e-14))
    mesh = Mesh2D(nodes, tri, np.array(edges), np.array(labels, dtype=object),
                  np.flatnonzero(on_crack), ((-crack_l0, 0.0), (crack_l0, 0.0)))
    return mesh.validate()


def _symmetrize(axis):
    """Replace an axis by its exact mirror image about zero (keeps the positive half)."""
    pos = axis[axis > 0]
    return np.concatenate([-pos[::-1], [0.0], pos])


def generate_sen_mesh(a, h_fine, h_coarse, fine_region=None, growth=1.25):
    """Single-edge-notched square ``[0, 2a]^2`` with a slit from ``(0, a)`` to ``(a, a)``.

    Nodes on the slit (tip excluded) are duplicated so the two faces are
    independent.  ``fine_region = (x0, x1, y0, y1)`` is meshed with spacing
    ``<= h_fine``; it defaults to the lower-right quadrant where the shear
    crack runs, widened by ``a/10``.
    """
    if not (0 < h_fine <= h_coarse <= a):
        raise MeshError("need 0 < h_fine <= h_coarse <= a")
    if fine_region is None:
        fine_region = (0.9 * a, 2 * a, 0.0, 1.1 * a)
    x0, x1, y0, y1 = fine_region
    xs = graded_axis(0.0, 2 * a, x0, x1, h_fine, h_coarse, growth, anchors=(a,))
    ys = graded_axis(0.0, 2 * a, y0, y1, h_fine, h_coarse, growth, anchors=(a,))
    for v, ax in ((a, xs), (a, ys)):
        if not np.any(np.isclose(ax, v, rtol=0, atol=1e-12 * a)):
            raise MeshError("grid lines must pass through the notch tip; widen the fine region")
    xs[np.isclose(xs, a, rtol=0, atol=1e-12 * a)] = a
    ys[np.isclose(ys, a, rtol=0, atol=1e-12 * a)] = a
    nx, ny = xs.size - 1, ys.size - 1
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    nodes = np.column_stack([X.ravel(), Y.ravel()])
    # diagonals aligned with the expected crack direction (down and to the right)
    tri, xc, yc = _grid_triangles(nx, ny, xs, ys, lambda xc, yc: np.ones_like(xc, bool))
    jslit = int(np.flatnonzero(ys == a)[0])
    islit = int(np.flatnonzero(xs == a)[0])
    slit_nodes = np.arange(islit) * (ny + 1) + jslit          # x < a on y = a
    dup = np.arange(nodes.shape[0], nodes.shape[0] + slit_nodes.size)
    remap = np.arange(nodes.shape[0] + slit_nodes.size)
    remap[slit_nodes] = dup
    nodes = np.vstack([nodes, nodes[slit_nodes]])
    upper = np.repeat((yc > a) & (xc < a), 2)
    tri[upper] = remap[tri[upper]]

    edges, labels = _outer_boundary(nx, ny)
    edges = np.array(edges)
    labels = np.array(labels, dtype=object)
    # left-edge edges above the slit must use the duplicated node at y = a
    left_above = (labels == "left") & (nodes[edges[:, 0], 1] > a) & (nodes[edges[:, 1], 1] >= a)
    edges[left_above] = remap[edges[left_above]]
    face = []
    for i in range(islit):
        lo_a, lo_b = i * (ny + 1) + jslit, (i + 1) * (ny + 1) + jslit
        face.append((lo_b, lo_a))                 # lower face, interior below
        up_a, up_b = remap[lo_a], remap[lo_b]
        face.append((up_a, up_b))                 # upper face, interior above
    edges = np.vstack([edges, np.array(face)])
    labels = np.concatenate([labels, np.array(["crack"] * len(face), dtype=object)])
    mesh = Mesh2D(nodes, tri, edges, labels)
    return mesh.validate()
